#pragma once

#include <cstdint>

#include "treepin/disorder.hpp"

namespace treepin {

// None           - homogeneous disorder everywhere.
// BranchShift    - leftmost branch carries V + u (requires d1 = 1).
// SubtreeConstant- leftmost d1-ary subtree carries the constant u.
// SubtreeShift   - leftmost d1-ary subtree carries V + u.
enum class DefectKind { None, BranchShift, SubtreeConstant, SubtreeShift };

struct ModelSpec {
    int d = 2;
    int d1 = 1;
    DisorderSpec bulk = DisorderSpec::gaussian(0.0, 1.0);
    DefectKind defect = DefectKind::None;
    double u = 0.0;

    static ModelSpec make(int d, int d1, DisorderSpec bulk, DefectKind defect, double u);

    bool has_defect() const { return defect != DefectKind::None; }
};

// Disorder value at a node whose defect-subtree membership is already known.
double node_value(const ModelSpec& m, std::uint64_t seed, NodeAddress addr, bool in_tilde);

// Same, deciding membership from the address.
inline double node_value(const ModelSpec& m, std::uint64_t seed, NodeAddress addr) {
    return node_value(m, seed, addr, m.has_defect() && in_defect_subtree(addr, m.d, m.d1));
}

}  // namespace treepin
