#include "loopmorse/catalog.hpp"

#include <map>
#include <stdexcept>

namespace loopmorse {

namespace {

TrigField cosine_well(int dim, int axis, double depth) {
    // -depth * cos(2 pi q_axis); the stiffness at the minimum is
    // depth * 4 pi^2, so depth = omega^2 / (4 pi^2) gives V'' = omega^2
    TrigTerm t;
    t.c = -depth;
    t.kq = Eigen::VectorXi::Zero(dim);
    t.kq[axis] = 1;
    t.q_sin.assign(dim, false);
    return TrigField(dim, {t});
}

TrigField sum_fields(const TrigField& a, const TrigField& b, int dim) {
    std::vector<TrigTerm> terms = a.terms();
    for (const auto& t : b.terms()) terms.push_back(t);
    return TrigField(dim, terms);
}

std::map<std::string, ReferenceSystem> build_catalog() {
    std::map<std::string, ReferenceSystem> cat;
    const double kPi = 3.14159265358979323846;
    const double depth = 0.25; // omega = pi

    {
        ReferenceSystem rs;
        rs.name = "pendulum-omega-pi";
        rs.lagrangian = std::make_shared<LagrangianSystem>(ManifoldModel::flat_torus(1),
                                                           cosine_well(1, 0, depth));
        rs.bc = BoundaryClass::Periodic;
        rs.classes = {Eigen::VectorXi::Zero(1)};
        rs.generators_per_class = 2;
        rs.expected_indices = {0, 1};
        rs.expected_actions = {-0.25, 0.25}; // E(const q) = -V(q)
        rs.expected_betti = {1, 1};          // each contractible component ~ S^1
        rs.action_bound = 2.0;
        cat[rs.name] = rs;
    }
    {
        ReferenceSystem rs;
        rs.name = "flat-circle-bvp";
        rs.lagrangian = std::make_shared<LagrangianSystem>(ManifoldModel::flat_torus(1),
                                                           TrigField::constant(1, 0.0));
        rs.bc = BoundaryClass::FixedEnds;
        rs.q0 = VectorXd::Zero(1);
        rs.q1 = (VectorXd(1) << 0.5).finished();
        for (int k = -2; k <= 2; ++k) {
            Eigen::VectorXi c(1);
            c << k;
            rs.classes.push_back(c);
        }
        rs.generators_per_class = 1;
        rs.expected_indices = {0};
        rs.expected_actions = {}; // (k + 1/2)^2 / 2, class-dependent; checked in tests
        rs.expected_betti = {1};  // each path component ~ point
        rs.action_bound = 10.0;
        cat[rs.name] = rs;
    }
    {
        ReferenceSystem rs;
        rs.name = "torus2-product-potential";
        TrigField V =
            sum_fields(cosine_well(2, 0, depth), cosine_well(2, 1, depth), 2);
        rs.lagrangian =
            std::make_shared<LagrangianSystem>(ManifoldModel::flat_torus(2), V);
        rs.bc = BoundaryClass::Periodic;
        rs.classes = {Eigen::VectorXi::Zero(2)};
        rs.generators_per_class = 4;
        rs.expected_indices = {0, 1, 1, 2};
        rs.expected_actions = {-0.5, 0.0, 0.0, 0.5};
        rs.expected_betti = {1, 2, 1}; // contractible component ~ T^2
        rs.action_bound = 2.0;
        cat[rs.name] = rs;
    }
    (void)kPi;
    return cat;
}

const std::map<std::string, ReferenceSystem>& catalog() {
    static const std::map<std::string, ReferenceSystem> cat = build_catalog();
    return cat;
}

} // namespace

bool ReferenceSystem::euler_consistent() const {
    long chi_betti = 0;
    for (size_t k = 0; k < expected_betti.size(); ++k)
        chi_betti += (k % 2 == 0 ? 1 : -1) * expected_betti[k];
    long chi_gen = 0;
    for (int idx : expected_indices) chi_gen += (idx % 2 == 0) ? 1 : -1;
    return chi_betti == chi_gen;
}

const ReferenceSystem& catalog_lookup(const std::string& name) {
    auto it = catalog().find(name);
    if (it == catalog().end())
        throw std::invalid_argument("catalog_lookup: unknown reference system '" + name + "'");
    return it->second;
}

std::vector<std::string> catalog_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : catalog()) names.push_back(k);
    return names;
}

} // namespace loopmorse
