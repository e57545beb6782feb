#include "treepin/model.hpp"

#include <cmath>
#include <string>

namespace treepin {

ModelSpec ModelSpec::make(int d, int d1, DisorderSpec bulk, DefectKind defect, double u) {
    if (d < 2) throw ConfigError("tree arity d must be >= 2, got " + std::to_string(d));
    if (d1 < 1 || d1 >= d)
        throw ConfigError("defect arity must satisfy 1 <= d1 < d, got d1=" + std::to_string(d1) +
                          " with d=" + std::to_string(d));
    if (defect == DefectKind::BranchShift && d1 != 1)
        throw ConfigError("branch_shift defect requires d1 = 1");
    if (!std::isfinite(u)) throw ConfigError("defect potential u must be finite");
    ModelSpec m;
    m.d = d;
    m.d1 = d1;
    m.bulk = std::move(bulk);
    m.defect = defect;
    m.u = defect == DefectKind::None ? 0.0 : u;
    return m;
}

double node_value(const ModelSpec& m, std::uint64_t seed, NodeAddress addr, bool in_tilde) {
    if (!in_tilde || m.defect == DefectKind::None) return sample_node(m.bulk, seed, addr);
    switch (m.defect) {
        case DefectKind::SubtreeConstant:
            return m.u;
        case DefectKind::BranchShift:
        case DefectKind::SubtreeShift:
            return sample_node(m.bulk, seed, addr) + m.u;
        default:
            return sample_node(m.bulk, seed, addr);
    }
}

}  // namespace treepin
