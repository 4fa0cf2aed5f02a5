#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpcomp/lattice.hpp"

namespace fpc {

/// The dual lattice Z^2 + (1/2,1/2). A DualVertex (x,y) is the point
/// (x+1/2, y+1/2) of the plane.
struct DualVertex {
    int32_t x = 0;
    int32_t y = 0;

    friend bool operator==(const DualVertex& a, const DualVertex& b) {
        return a.x == b.x && a.y == b.y;
    }
    friend bool operator<(const DualVertex& a, const DualVertex& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    }
};

/// Unit edge of the dual lattice, canonical order a < b.
struct DualEdge {
    DualVertex a;
    DualVertex b;

    friend bool operator==(const DualEdge& x, const DualEdge& y) {
        return x.a == y.a && x.b == y.b;
    }
    friend bool operator<(const DualEdge& x, const DualEdge& y) {
        return x.a == y.a ? x.b < y.b : x.a < y.a;
    }
};

/// s(e) for a dual edge: the unique primal pair {i,j} closing a unit
/// square with the dual endpoints (the primal edge it crosses).
std::pair<Site, Site> crossing_pair(const DualEdge& e);

/// s(e) for a primal edge: the dual edge crossing it. Together with
/// crossing_pair this realizes the involution s(s(e)) = e.
DualEdge dual_of_primal(const Edge& e);

struct ContourSet {
    std::vector<DualEdge> edges;  // sorted, canonical
    bool is_cycle = false;        // every dual vertex has even degree, one closed walk
    bool is_simple = false;       // all degrees exactly 2
    /// For traced contours: the closed walk (first vertex repeated last).
    std::vector<DualVertex> ordered;
};

/// Peierls(A): dual edges whose crossing pair straddles the indicator of
/// A; drawn in the plane they bound A + [-1/2,1/2]^2.
ContourSet peierls_contours(std::span<const Site> A);

/// Gamma(A) for connected A: the cycle of Peierls(A) bounding the
/// unbounded component of the filled complement, traced in order with a
/// right-hand walk (interior on the left). Rejects disconnected A.
ContourSet outer_contour(std::span<const Site> A);

struct BoundaryDecomposition {
    std::vector<Site> c_ext;         // complement component touching the frame
    std::vector<Site> d_ext;         // occupied sites adjacent to c_ext
    std::vector<Site> d_ext_strong;  // strong subset of d_ext
    bool saturated = false;          // occupied fills the box; c_ext empty
};

/// Finite surrogate of "the infinite component of the complement": BFS
/// over complement sites from the box frame (4-adjacency).
BoundaryDecomposition external_boundary(std::span<const Site> occupied,
                                        std::span<const Site> strong, const Box& box);

/// Maximal 8-adjacency components, each sorted, ordered by smallest site.
std::vector<std::vector<Site>> star_components(std::span<const Site> S);

/// Connectivity of a dual-edge set through shared endpoints.
bool dual_edges_connected(std::span<const DualEdge> edges);

/// Ordered contour as a JSON array of [x+0.5, y+0.5] vertices.
std::string contour_to_json(const ContourSet& c);

}  // namespace fpc
