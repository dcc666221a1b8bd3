#pragma once

#include <iosfwd>
#include <string>

#include "gqnet/sim.hpp"
#include "gqnet/types.hpp"

namespace gqnet {

/// Thrown on malformed input files; message carries a line number when known.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Dataset {
    Eigen::VectorXd y;
    GroupedDesign design;
};

/// Delimited text (comma or whitespace, autodetected): first column is the
/// response, the rest the design. Group structure comes from a
/// `#groups: g p` header, a `#groupmap: id id ...` header, or the
/// groups_override argument (0 = take it from the file).
Dataset read_dataset(const std::string& path, int groups_override = 0);

/// Coefficient files: `# tau/lambda/...` metadata comments followed by one
/// `group <j> <v1> ... <vp>` line per group, 17 significant digits.
void write_coefficients(std::ostream& os, const GroupedCoefficients& beta);
GroupedCoefficients read_coefficients(const std::string& path);

/// Line-oriented `key = value` scenario files. Keys: n, g, p, error, sigma,
/// tau, reps, seed, beta (preset name or comma list), sn. Unknown keys throw
/// a ParseError naming the key.
SimulationScenario read_scenario(const std::string& path);

double parse_finite_double(const std::string& token, const std::string& context);

}  // namespace gqnet
