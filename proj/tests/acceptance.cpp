// Acceptance suite: every verification criterion at its pinned tolerance,
// one pass/fail line each.
//
// Build:  cmake --build build --target acceptance
// Run:    build/acceptance

#include <chrono>
#include <iostream>

#include <twistor/verify.hpp>

int main() {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const auto checks = twistor::run_acceptance();

    int passed = 0;
    for (const auto& c : checks) {
        std::cout << twistor::format_check(c) << "\n";
        if (c.passed) ++passed;
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    std::cout << "\n" << passed << "/" << checks.size() << " checks passed in " << secs
              << " s\n";
    return passed == static_cast<int>(checks.size()) ? 0 : 1;
}
