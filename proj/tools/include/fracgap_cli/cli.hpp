#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracgap/geometry.hpp"

namespace fracgap::cli {

enum ExitCode : int {
  kSuccess = 0,
  kVerdictFailure = 1,
  kUsage = 2,
  kNumericalFailure = 3,
};

/// Runs one subcommand. `args` excludes the program name. Reports go to
/// `out`, diagnostics and warnings to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Domain from an inline description:
///   interval:a,b[;c,d...]   union of disjoint intervals
///   box:a,b | box:x0,y0,x1,y1
///   ball:c,r | ball:cx,cy,r
///   balls:<ball>;<ball>...
///   boxdiff:x0,y0,x1,y1,hx0,hy0,hx1,hy1   outer box minus closed hole
///   lshape
///   mask:path
/// The dimension follows from the text; `dim` only disambiguates and is
/// checked for consistency. Throws InvalidArgument on malformed input.
Domain parse_domain(const std::string& text, std::optional<int> dim = std::nullopt);

/// Comma separated point, "x" or "x,y".
Point parse_point(const std::string& text, int dim);

}  // namespace fracgap::cli
