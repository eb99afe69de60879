#pragma once

#include <string>
#include <vector>

namespace dsiscan {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double millis = 0.0;
};

// Runs the full acceptance suite at desk scale; one entry per criterion.
std::vector<CriterionResult> run_acceptance();

}  // namespace dsiscan
