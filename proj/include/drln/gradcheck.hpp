#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace drln {

struct GradCheckEntry {
    std::string op;
    double worst_rel_err = 0.0;
    int samples = 0;
};

/// Central finite-difference verification of every differentiable op class in
/// 64-bit mode, plus an end-to-end desk-preset network sweep. `only_ops`
/// restricts the classes checked (empty = all). `fault_op` corrupts the
/// analytic gradient of one class, for exercising the failure path.
std::vector<GradCheckEntry> run_gradcheck(std::uint64_t seed,
                                          const std::vector<std::string>& only_ops = {},
                                          const std::string& fault_op = {});

std::vector<std::string> gradcheck_op_names();

bool gradcheck_passed(const std::vector<GradCheckEntry>& entries, double threshold = 1e-3);

}  // namespace drln
