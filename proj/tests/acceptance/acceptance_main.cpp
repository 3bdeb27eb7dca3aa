// Runs the twelve acceptance criteria at full resolution, one line each.
#include <cstdlib>
#include <iostream>

#include "qplab/verify.hpp"

int main(int argc, char** argv) {
    qplab::VerifyOptions o;
    for (int i = 1; i < argc; ++i) o.only.push_back(std::atoi(argv[i]));
    const auto results = qplab::run_verify(o);
    int failed = 0;
    for (const auto& r : results) {
        std::cout << qplab::format_result(r) << "\n";
        failed += r.pass ? 0 : 1;
    }
    std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
