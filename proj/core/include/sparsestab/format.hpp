#pragma once

#include <string>

namespace sparsestab {

/// Shortest form of a real that still carries 17 significant digits ("%.17g").
/// Every machine-readable artifact (matrix files, JSON, CSV) goes through here
/// so that repeated runs are byte-identical.
std::string format_real(double value);

}  // namespace sparsestab
