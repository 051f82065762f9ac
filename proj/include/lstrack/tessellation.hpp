#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "lstrack/levelset.hpp"
#include "lstrack/stochastic_space.hpp"

namespace lstrack {

struct SimplexMesh {
    int dim = 2;
    std::vector<std::vector<double>> vertices;
    std::vector<std::vector<int>> simplices;  // d+1 vertex indices each
    std::vector<std::int8_t> labels;          // majority phi sign per simplex
    std::vector<std::vector<std::size_t>> points;  // contained grid points per simplex

    std::size_t size() const { return simplices.size(); }
    // |det T| / d!
    double volume(std::size_t s) const;
    std::vector<std::vector<double>> simplex_vertices(std::size_t s) const;
    // Barycentric coordinates (d+1 values summing to one).
    void barycentric(std::size_t s, std::span<const double> xi, std::span<double> out) const;
};

// Kuhn split of coarse_n^d boxes covering E, d! simplices per box.
SimplexMesh initial_mesh(int dim, int coarse_n);

struct RefineStats {
    int sweeps = 0;
    std::size_t inserted = 0;
    int mixed_splits = 0;  // passes that split simplices with mixed point signs
};

// Inserts linear roots of phi on sign-changing edges (at least min_sep away
// from every vertex) and re-triangulates, until no vertex is added. With
// split_mixed, simplices whose grid points carry both signs are then split at
// a root between contained points and edge sweeps resume. Supports d = 2 and 3.
SimplexMesh refine_by_levelset(const SimplexMesh& mesh, const LevelSetField& field, double min_sep,
                               int max_sweeps = 100, RefineStats* stats = nullptr, bool split_mixed = true);

// Fills `points` (each grid point in exactly one simplex, lowest index on
// ties) and `labels` (majority sign of phi over contained points; phi at the
// centroid when empty or tied).
void assign_points(SimplexMesh& mesh, const LevelSetField& field);
// Bin-accelerated point location (lowest simplex index on ties).
class SimplexLocator {
public:
    explicit SimplexLocator(const SimplexMesh& mesh);
    std::size_t locate(std::span<const double> xi) const;

private:
    const SimplexMesh& mesh_;
    int bins_ = 1;
    std::vector<std::vector<std::size_t>> cells_;
};

void write_mesh_csv(std::ostream& vertices_out, std::ostream& simplices_out, const SimplexMesh& mesh);

}  // namespace lstrack
