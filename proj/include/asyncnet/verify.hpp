#ifndef ASYNCNET_VERIFY_HPP
#define ASYNCNET_VERIFY_HPP

#include <string>
#include <vector>

#include "asyncnet/config.hpp"

namespace asyncnet {

struct CheckOutcome {
  std::string suite;
  std::string name;
  bool pass = false;
  bool skipped = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

// Runs one named invariant suite against a configuration. Valid names:
// moments, lemmas, recursion, bounds, scaling, fourth, all. Unknown names
// throw std::invalid_argument.
std::vector<CheckOutcome> run_verify(const ExperimentConfig& config,
                                     const std::string& suite);

std::size_t count_failures(const std::vector<CheckOutcome>& outcomes);

void write_verify_csv(const std::vector<CheckOutcome>& outcomes,
                      const std::string& path);

}  // namespace asyncnet

#endif  // ASYNCNET_VERIFY_HPP
