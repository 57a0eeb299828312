#pragma once

#include <memory>
#include <string>
#include <vector>

#include "loopmorse/systems.hpp"

namespace loopmorse {

// Reference data for acceptance: known generator counts, indices, actions and
// loop-space homology for the supported systems.  Code-embedded to keep the
// acceptance suite hermetic.
struct ReferenceSystem {
    std::string name;
    std::shared_ptr<const LagrangianSystem> lagrangian;
    BoundaryClass bc = BoundaryClass::Periodic;
    VectorXd q0, q1; // fixed-ends data

    std::vector<Eigen::VectorXi> classes;       // homotopy classes to explore
    int generators_per_class = 0;
    std::vector<int> expected_indices;          // sorted, per class
    std::vector<double> expected_actions;       // sorted, per class (closed form)
    std::vector<long> expected_betti;           // per degree, per class
    double action_bound = 10.0;

    // alternating sum consistency when the boundary vanishes
    bool euler_consistent() const;
};

const ReferenceSystem& catalog_lookup(const std::string& name);
std::vector<std::string> catalog_names();

} // namespace loopmorse
