#ifndef ERGO_EXEC_HPP
#define ERGO_EXEC_HPP

namespace ergo {

// Execution mode for the data-parallel kernels.  Every kernel keeps a serial
// reference path; the OpenMP path must produce identical results (fixed
// summation order within each output entry, commutative reductions only).
enum class Exec { serial, parallel };

// Process-wide default, settable from the CLI (--parallel) or tests.
Exec default_exec();
void set_default_exec(Exec mode);

// Number of OpenMP threads the parallel path will use (1 without OpenMP).
int exec_threads();
void set_exec_threads(int n);

}  // namespace ergo

#endif
