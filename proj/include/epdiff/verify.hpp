#ifndef EPDIFF_VERIFY_HPP
#define EPDIFF_VERIFY_HPP

#include <string>
#include <vector>

namespace epdiff {

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed = false;
};

/** Runs the built-in self-checks and reports one named result per check:
 *
 *   dft-unitarity                  transform round trip and Parseval
 *   tensor-contraction-equivalence fast contractions vs dense matrices
 *   mutation-sensitivity           a seeded sign defect must be detected
 *   jacobian-fd-agreement          analytic vs finite-difference Jacobians
 *   energy-identities              closed-form energies and single-mode
 *                                  update terms
 *
 * tensor_mode_counts selects the grid sizes for the dense-tensor check
 * (P = 2n+1 points each). Oversized requests are reported as a failed
 * check carrying the resource-limit message rather than thrown. */
VerifyReport run_verification(const std::vector<int>& tensor_mode_counts = {2, 3, 4});

std::string verify_report_json(const VerifyReport& report);

}  // namespace epdiff

#endif
