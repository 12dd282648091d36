#include "ergo/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ergo {

Site site_add(const Site& a, const Site& b) {
  if (a.size() != b.size()) throw InvalidArgument("site dimension mismatch");
  Site out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Neighbourhood::Neighbourhood(int dimension, std::vector<Site> offsets)
    : dimension_(dimension), offsets_(std::move(offsets)) {
  if (dimension_ < 1) throw InvalidArgument("neighbourhood dimension must be >= 1");
  if (offsets_.empty()) throw InvalidArgument("neighbourhood must be nonempty");
  std::set<Site> seen;
  radius_ = 0;
  has_origin_ = false;
  for (const Site& o : offsets_) {
    if (static_cast<int>(o.size()) != dimension_)
      throw InvalidArgument("neighbourhood offset dimension mismatch");
    if (!seen.insert(o).second) throw InvalidArgument("duplicate neighbourhood offset");
    bool zero = true;
    for (int c : o) {
      radius_ = std::max(radius_, std::abs(c));
      if (c != 0) zero = false;
    }
    if (zero) has_origin_ = true;
  }
}

SiteSet::SiteSet(std::vector<Site> sites) : sites_(std::move(sites)) {
  if (!sites_.empty()) {
    const std::size_t d = sites_[0].size();
    for (const Site& s : sites_) {
      if (s.size() != d) throw InvalidArgument("site set dimension mismatch");
    }
  }
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

SiteSet SiteSet::interval(int lo, int hi) {
  std::vector<Site> sites;
  for (int i = lo; i <= hi; ++i) sites.push_back({i});
  return SiteSet(std::move(sites));
}

SiteSet SiteSet::box(const Site& lo, const Site& hi) {
  if (lo.size() != hi.size()) throw InvalidArgument("box corner dimension mismatch");
  const int d = static_cast<int>(lo.size());
  for (int i = 0; i < d; ++i) {
    if (lo[i] > hi[i]) return SiteSet{};
  }
  std::vector<Site> sites;
  Site cur = lo;
  while (true) {
    sites.push_back(cur);
    int axis = d - 1;
    while (axis >= 0) {
      if (++cur[axis] <= hi[axis]) break;
      cur[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) break;
  }
  return SiteSet(std::move(sites));
}

int SiteSet::dimension() const {
  return sites_.empty() ? 0 : static_cast<int>(sites_[0].size());
}

bool SiteSet::contains(const Site& s) const {
  return std::binary_search(sites_.begin(), sites_.end(), s);
}

std::size_t SiteSet::index_of(const Site& s) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
  if (it == sites_.end() || *it != s) throw InvalidArgument("site not in set");
  return static_cast<std::size_t>(it - sites_.begin());
}

bool SiteSet::is_subset_of(const SiteSet& other) const {
  return std::includes(other.sites_.begin(), other.sites_.end(),
                       sites_.begin(), sites_.end());
}

std::vector<int> SiteSet::bounding_sides() const {
  if (sites_.empty()) return {};
  const int d = dimension();
  std::vector<int> lo(sites_[0].begin(), sites_[0].end());
  std::vector<int> hi = lo;
  for (const Site& s : sites_) {
    for (int i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], s[i]);
      hi[i] = std::max(hi[i], s[i]);
    }
  }
  std::vector<int> sides(d);
  for (int i = 0; i < d; ++i) sides[i] = hi[i] - lo[i] + 1;
  return sides;
}

bool SiteSet::is_box() const {
  if (sites_.empty()) return false;
  std::size_t volume = 1;
  for (int side : bounding_sides()) volume *= static_cast<std::size_t>(side);
  return volume == sites_.size();  // sites are distinct, so counts match iff box
}

SiteSet set_union(const SiteSet& a, const SiteSet& b) {
  std::vector<Site> sites = a.sites();
  sites.insert(sites.end(), b.sites().begin(), b.sites().end());
  return SiteSet(std::move(sites));
}

SiteSet translate(const SiteSet& a, const Site& by) {
  std::vector<Site> sites;
  sites.reserve(a.size());
  for (const Site& s : a.sites()) sites.push_back(site_add(s, by));
  return SiteSet(std::move(sites));
}

std::size_t TorusSpec::site_count() const {
  std::size_t n = 1;
  for (int side : sides) n *= static_cast<std::size_t>(side);
  return n;
}

void TorusSpec::validate() const {
  if (sides.empty()) throw InvalidArgument("torus needs at least one axis");
  for (int side : sides) {
    if (side < 1) throw InvalidArgument("torus axis length must be >= 1");
  }
}

Site TorusSpec::wrap(const Site& s) const {
  if (s.size() != sides.size()) throw InvalidArgument("torus site dimension mismatch");
  Site out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    int m = s[i] % sides[i];
    if (m < 0) m += sides[i];
    out[i] = m;
  }
  return out;
}

std::size_t TorusSpec::site_index(const Site& s) const {
  Site w = wrap(s);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    idx = idx * static_cast<std::size_t>(sides[i]) + static_cast<std::size_t>(w[i]);
  }
  return idx;
}

Site TorusSpec::site_at(std::size_t index) const {
  Site s(sides.size());
  for (std::size_t i = sides.size(); i-- > 0;) {
    s[i] = static_cast<int>(index % static_cast<std::size_t>(sides[i]));
    index /= static_cast<std::size_t>(sides[i]);
  }
  return s;
}

SiteSet neighbourhood_of(const SiteSet& A, const Neighbourhood& N) {
  if (!A.empty() && A.dimension() != N.dimension())
    throw InvalidArgument("site set and neighbourhood dimension mismatch");
  std::vector<Site> sites;
  sites.reserve(A.size() * N.size());
  for (const Site& a : A.sites()) {
    for (const Site& o : N.offsets()) sites.push_back(site_add(a, o));
  }
  return SiteSet(std::move(sites));
}

SiteSet iterated_neighbourhood(const SiteSet& A, const Neighbourhood& N, int t) {
  if (t < 0) throw InvalidArgument("iterated neighbourhood needs t >= 0");
  SiteSet cur = A;
  for (int i = 0; i < t; ++i) cur = neighbourhood_of(cur, N);
  return cur;
}

namespace {

SiteSet inner_boundary_impl(const SiteSet& J, const Neighbourhood& N,
                            const TorusSpec* torus) {
  if (!J.empty() && J.dimension() != N.dimension())
    throw InvalidArgument("site set and neighbourhood dimension mismatch");
  std::vector<Site> out;
  for (const Site& k : J.sites()) {
    for (const Site& o : N.offsets()) {
      Site n = site_add(k, o);
      if (torus) n = torus->wrap(n);
      if (!J.contains(n)) {
        out.push_back(k);
        break;
      }
    }
  }
  return SiteSet(std::move(out));
}

}  // namespace

SiteSet inner_boundary(const SiteSet& J, const Neighbourhood& N) {
  return inner_boundary_impl(J, N, nullptr);
}

SiteSet inner_boundary(const SiteSet& J, const Neighbourhood& N, const TorusSpec& torus) {
  return inner_boundary_impl(J, N, &torus);
}

std::size_t packing_number(const SiteSet& B, const SiteSet& A) {
  if (A.empty() || B.empty()) throw UnsupportedShape("packing_number needs nonempty boxes");
  if (!A.is_box() || !B.is_box()) throw UnsupportedShape("packing_number supports axis-aligned boxes only");
  if (A.dimension() != B.dimension()) throw InvalidArgument("box dimension mismatch");
  const std::vector<int> sa = A.bounding_sides();
  const std::vector<int> sb = B.bounding_sides();
  std::size_t count = 1;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    count *= static_cast<std::size_t>(sb[i] / sa[i]);
  }
  return count;
}

int influence_window_steps(std::size_t a, std::size_t rho, double eps, double t) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("influence window needs eps in (0,1)");
  if (t < 0.0) throw InvalidArgument("influence window needs t >= 0");
  double s = 8.0 * static_cast<double>(rho) * t;
  if (a > 0) s = std::max(s, std::log(static_cast<double>(a) / eps));
  if (s <= 0.0) return 0;
  return static_cast<int>(std::floor(s));
}

SiteSet influence_window(const SiteSet& A, const Neighbourhood& N, double eps, double t) {
  const int steps = influence_window_steps(A.size(), N.size(), eps, t);
  return iterated_neighbourhood(A, N, steps);
}

}  // namespace ergo
