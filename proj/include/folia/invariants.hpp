#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "folia/reeb.hpp"

namespace folia {

struct SuiteResult {
    std::string name;
    bool passed = false;
    bool skipped = false;
    int checked = 0;
    int failed = 0;
    double share = 1.0;  // passing fraction of the checked cases
    std::string detail;
};

struct InvariantOptions {
    int resolution = 128;                     // detection grid and certification cell count per diameter
    std::vector<double> eps{1e-2, 1e-3, 1e-4};
    int edge_samples = 20;                    // points of gamma_plus tested against the cloud
    int pairs = 10;                           // certified (x, y) pairs for the iterate arc check
    int arcs = 100;                           // random crossing arcs for the free arc check
    int symmetry_cells = 40;
    double symmetry_share = 0.95;
    int generic_points = 5;                   // containment base points when no component exists
    std::uint64_t seed = 0;
};

struct InvariantReport {
    std::vector<ReebComponentReport> components;
    std::vector<SuiteResult> suites;
    std::string detection;  // "ok" or the reason detection was skipped

    bool passed() const;
    const SuiteResult* suite(const std::string& name) const;
};

// Suites: edge_in_prolongation, map_in_flow, symmetry, iterate_arc, free_arc.
InvariantReport check_invariants(const FlowMap& flow, const Window& window, const InvariantOptions& opts = {});

}  // namespace folia
