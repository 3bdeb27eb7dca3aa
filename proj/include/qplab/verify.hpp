#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qplab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;  // measured quantities against their bounds, or the error that stopped the check
    double seconds = 0.0;
};

struct VerifyOptions {
    std::size_t n_points = 0;  // nonzero: every grid of every criterion gets this many nodes
    std::uint64_t seed = 2024;
    std::vector<int> only;     // criterion ids; empty runs all
    bool parallel = true;
};

inline constexpr int kCriterionCount = 12;
const char* criterion_name(int id);

// Runs the selected criteria (concurrently when asked) and returns them in
// id order. Exceptions inside a criterion mark it failed.
std::vector<CriterionResult> run_verify(const VerifyOptions& options);

// "PASS 01 gaussian_functionals: <detail>"
std::string format_result(const CriterionResult& r);

}  // namespace qplab
