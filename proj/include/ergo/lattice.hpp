#ifndef ERGO_LATTICE_HPP
#define ERGO_LATTICE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ergo/errors.hpp"

namespace ergo {

// A lattice position or offset in Z^d.
using Site = std::vector<int>;

Site site_add(const Site& a, const Site& b);

// Finite dependence neighbourhood N of a local rule.  The offset order is
// significant: pattern/row encodings downstream treat the first listed offset
// as the most significant digit.
class Neighbourhood {
 public:
  Neighbourhood(int dimension, std::vector<Site> offsets);

  int dimension() const { return dimension_; }
  const std::vector<Site>& offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }  // rho = |N|
  int radius() const { return radius_; }  // smallest r with N in [-r,r]^d
  bool contains_origin() const { return has_origin_; }

 private:
  int dimension_;
  std::vector<Site> offsets_;
  int radius_;
  bool has_origin_;
};

// Finite set of absolute lattice positions, stored sorted in lexicographic
// coordinate order.  That canonical order defines all pattern encodings, so
// it must never change.
class SiteSet {
 public:
  SiteSet() = default;
  explicit SiteSet(std::vector<Site> sites);  // sorts and dedups

  static SiteSet interval(int lo, int hi);            // 1D [lo, hi]
  static SiteSet box(const Site& lo, const Site& hi); // inclusive corners

  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  int dimension() const;  // 0 for the empty set
  const std::vector<Site>& sites() const { return sites_; }
  const Site& operator[](std::size_t i) const { return sites_[i]; }

  bool contains(const Site& s) const;
  // Position of s in canonical order; throws if absent.
  std::size_t index_of(const Site& s) const;
  bool is_subset_of(const SiteSet& other) const;

  bool is_box() const;
  // Side lengths (site counts per axis) of the bounding box.
  std::vector<int> bounding_sides() const;

  friend bool operator==(const SiteSet&, const SiteSet&) = default;

 private:
  std::vector<Site> sites_;
};

SiteSet set_union(const SiteSet& a, const SiteSet& b);
SiteSet translate(const SiteSet& a, const Site& by);

// Finite periodic lattice (finite-volume carrier for exact IPS computation).
// Site indexing is row-major over the wrapped coordinates, which agrees with
// the lexicographic canonical order of SiteSet.
struct TorusSpec {
  std::vector<int> sides;

  int dimension() const { return static_cast<int>(sides.size()); }
  std::size_t site_count() const;
  void validate() const;  // every axis length >= 1

  Site wrap(const Site& s) const;
  std::size_t site_index(const Site& s) const;  // index of wrap(s)
  Site site_at(std::size_t index) const;
};

// N(A) = {a + i : a in A, i in N}.
SiteSet neighbourhood_of(const SiteSet& A, const Neighbourhood& N);

// N^t(A); N^0(A) = A.
SiteSet iterated_neighbourhood(const SiteSet& A, const Neighbourhood& N, int t);

// Inner boundary of J relative to N: the sites of J whose neighbourhood
// leaves J.  The torus overload tests membership modulo the torus, so the
// full torus always has empty boundary.
SiteSet inner_boundary(const SiteSet& J, const Neighbourhood& N);
SiteSet inner_boundary(const SiteSet& J, const Neighbourhood& N, const TorusSpec& torus);

// Maximum number of disjoint translates of box A packable in box B; rejects
// non-box inputs (general-set packing is not needed anywhere and is hard).
std::size_t packing_number(const SiteSet& B, const SiteSet& A);

// N^{floor(s)}(A) with s = max{8 rho t, ln(|A|/eps)}, clamped at zero
// iterations.  This is the concentration window of the influence lemma.
SiteSet influence_window(const SiteSet& A, const Neighbourhood& N, double eps, double t);
// The iterate count used by influence_window (exposed for reports).
int influence_window_steps(std::size_t a, std::size_t rho, double eps, double t);

}  // namespace ergo

#endif
