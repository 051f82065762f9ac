#pragma once

#include <array>
#include <span>
#include <vector>

namespace lstrack {

// Incremental Bowyer-Watson triangulation in 2 or 3 dimensions. Starts from a
// valid (Delaunay) triangulation of a convex region; points are inserted one
// at a time, either inside or on the boundary of that region.
class Delaunay {
public:
    Delaunay(int dim, std::vector<std::array<double, 3>> vertices, const std::vector<std::array<int, 4>>& simplices);

    int dim() const { return dim_; }
    // Returns the new vertex index. Throws DegenerateGeometry when the point is
    // outside the region or the cavity cannot be re-triangulated even after a
    // small perturbation.
    int insert(std::span<const double> p);

    const std::vector<std::array<double, 3>>& vertices() const { return vertices_; }
    // Live simplices, positively oriented.
    std::vector<std::array<int, 4>> simplices() const;

    // Signed volume factor det[v1 - v0, ..., vd - v0].
    static double orientation(int dim, const std::array<double, 3>* const* pts);

private:
    struct Cell {
        std::array<int, 4> v;
        std::array<double, 3> center;
        double radius2;
        bool alive;
    };

    void add_cell(std::array<int, 4> v);
    bool try_insert(const std::array<double, 3>& p, int index);
    bool strictly_inside_sphere(const Cell& c, const std::array<double, 3>& p) const;

    int dim_;
    double scale_;
    std::vector<std::array<double, 3>> vertices_;
    std::vector<Cell> cells_;
};

}  // namespace lstrack
