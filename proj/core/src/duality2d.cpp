#include "fpcomp/duality2d.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace fpc {

namespace {

void require_2d(std::span<const Site> A) {
    for (const Site& s : A)
        if (s.dim != 2) throw std::invalid_argument("duality2d: sites must be 2-dimensional");
}

}  // namespace

std::pair<Site, Site> crossing_pair(const DualEdge& e) {
    if (e.a.y == e.b.y) {
        // Horizontal dual edge; crosses the vertical primal edge at its midpoint.
        const int32_t x = std::min(e.a.x, e.b.x) + 1;
        const int32_t y = e.a.y;
        return {Site{x, y}, Site{x, y + 1}};
    }
    const int32_t x = e.a.x;
    const int32_t y = std::min(e.a.y, e.b.y) + 1;
    return {Site{x, y}, Site{x + 1, y}};
}

DualEdge dual_of_primal(const Edge& e) {
    const int32_t x = e.a.c[0];
    const int32_t y = e.a.c[1];
    if (e.axis() == 1) {
        // Vertical primal edge {(x,y),(x,y+1)}: horizontal dual edge.
        return DualEdge{{x - 1, y}, {x, y}};
    }
    // Horizontal primal edge {(x,y),(x+1,y)}: vertical dual edge.
    return DualEdge{{x, y - 1}, {x, y}};
}

namespace {

struct DualVertexHash {
    size_t operator()(const DualVertex& v) const {
        return (static_cast<uint64_t>(static_cast<uint32_t>(v.x)) << 32) ^
               static_cast<uint32_t>(v.y);
    }
};

void classify(ContourSet& c) {
    std::unordered_map<DualVertex, int, DualVertexHash> degree;
    for (const DualEdge& e : c.edges) {
        ++degree[e.a];
        ++degree[e.b];
    }
    bool even = true, deg2 = true;
    for (const auto& [v, d] : degree) {
        if (d % 2 != 0) even = false;
        if (d != 2) deg2 = false;
    }
    const bool connected = dual_edges_connected(c.edges);
    c.is_cycle = !c.edges.empty() && even && connected;
    c.is_simple = !c.edges.empty() && deg2 && connected;
}

std::vector<Site> dedupe(std::span<const Site> A) {
    std::vector<Site> v(A.begin(), A.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

bool four_connected(const std::vector<Site>& sorted_sites) {
    if (sorted_sites.empty()) return false;
    std::unordered_set<Site, SiteHash> in(sorted_sites.begin(), sorted_sites.end());
    std::vector<Site> stack = {sorted_sites.front()};
    std::unordered_set<Site, SiteHash> seen = {sorted_sites.front()};
    while (!stack.empty()) {
        const Site x = stack.back();
        stack.pop_back();
        for (const Site& y : neighbors(x)) {
            if (in.count(y) && !seen.count(y)) {
                seen.insert(y);
                stack.push_back(y);
            }
        }
    }
    return seen.size() == sorted_sites.size();
}

}  // namespace

ContourSet peierls_contours(std::span<const Site> A) {
    require_2d(A);
    const std::vector<Site> sites = dedupe(A);
    std::unordered_set<Site, SiteHash> in(sites.begin(), sites.end());
    ContourSet c;
    for (const Site& x : sites) {
        for (const Site& y : neighbors(x)) {
            if (!in.count(y)) c.edges.push_back(dual_of_primal(edge_between(x, y)));
        }
    }
    std::sort(c.edges.begin(), c.edges.end());
    classify(c);
    return c;
}

namespace {

// Directed boundary walk. Directions: 0 = +x, 1 = +y, 2 = -x, 3 = -y.
DualVertex step(const DualVertex& v, int dir) {
    switch (dir) {
        case 0: return {v.x + 1, v.y};
        case 1: return {v.x, v.y + 1};
        case 2: return {v.x - 1, v.y};
        default: return {v.x, v.y - 1};
    }
}

}  // namespace

ContourSet outer_contour(std::span<const Site> A) {
    require_2d(A);
    const std::vector<Site> sites = dedupe(A);
    if (sites.empty()) throw std::invalid_argument("outer_contour: empty set");
    if (!four_connected(sites)) throw std::invalid_argument("outer_contour: set is disconnected");

    // Complement component reaching infinity, within a margin-1 bounding box.
    int32_t lox = sites[0].c[0], hix = sites[0].c[0];
    int32_t loy = sites[0].c[1], hiy = sites[0].c[1];
    for (const Site& s : sites) {
        lox = std::min(lox, s.c[0]);
        hix = std::max(hix, s.c[0]);
        loy = std::min(loy, s.c[1]);
        hiy = std::max(hiy, s.c[1]);
    }
    --lox, --loy, ++hix, ++hiy;
    std::unordered_set<Site, SiteHash> in(sites.begin(), sites.end());
    std::unordered_set<Site, SiteHash> ext;
    std::vector<Site> stack;
    const Site corner{lox, loy};
    ext.insert(corner);
    stack.push_back(corner);
    while (!stack.empty()) {
        const Site x = stack.back();
        stack.pop_back();
        for (const Site& y : neighbors(x)) {
            if (y.c[0] < lox || y.c[0] > hix || y.c[1] < loy || y.c[1] > hiy) continue;
            if (in.count(y) || ext.count(y)) continue;
            ext.insert(y);
            stack.push_back(y);
        }
    }

    ContourSet c;
    // Directed edges with the set on the left; each boundary edge gets a
    // unique direction, so the walk below is well defined.
    std::map<std::pair<DualVertex, int>, bool> directed;  // (tail, dir) -> used
    for (const Site& x : sites) {
        for (const Site& y : neighbors(x)) {
            if (!ext.count(y)) continue;
            const DualEdge e = dual_of_primal(edge_between(x, y));
            c.edges.push_back(e);
            int dir;
            DualVertex tail;
            if (e.a.y == e.b.y) {  // horizontal dual edge, crossing pair is vertical
                const auto [p, q] = crossing_pair(e);  // q = p + e2
                if (in.count(q)) {
                    dir = 0;  // +x keeps q on the left
                    tail = e.a.x < e.b.x ? e.a : e.b;
                } else {
                    dir = 2;
                    tail = e.a.x < e.b.x ? e.b : e.a;
                }
            } else {  // vertical dual edge, crossing pair is horizontal
                const auto [p, q] = crossing_pair(e);  // q = p + e1
                if (in.count(q)) {
                    dir = 3;  // -y keeps q (east side) on the left
                    tail = e.a.y < e.b.y ? e.b : e.a;
                } else {
                    dir = 1;
                    tail = e.a.y < e.b.y ? e.a : e.b;
                }
            }
            directed[{tail, dir}] = false;
        }
    }
    std::sort(c.edges.begin(), c.edges.end());
    c.edges.erase(std::unique(c.edges.begin(), c.edges.end()), c.edges.end());
    classify(c);

    // Right-hand walk from the smallest directed edge; at pinch vertices
    // the rightmost available turn keeps the walk hugging the set.
    if (!directed.empty()) {
        const auto start = directed.begin()->first;
        DualVertex v = start.first;
        int dir = start.second;
        c.ordered.push_back(v);
        size_t used = 0;
        while (true) {
            directed[{v, dir}] = true;
            ++used;
            v = step(v, dir);
            c.ordered.push_back(v);
            if (v == start.first && used == directed.size()) break;
            bool moved = false;
            for (const int turn : {3, 0, 1}) {  // right, straight, left
                const int nd = (dir + turn) % 4;
                const auto it = directed.find({v, nd});
                if (it != directed.end() && !it->second) {
                    dir = nd;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;  // walk closed early; leftovers mean extra loops
        }
        if (used != directed.size()) {
            c.is_cycle = false;  // the outer boundary did not close over all edges
        }
    }
    return c;
}

BoundaryDecomposition external_boundary(std::span<const Site> occupied,
                                        std::span<const Site> strong, const Box& box) {
    require_2d(occupied);
    if (box.dim() != 2) throw std::invalid_argument("external_boundary: box must be 2d");
    const size_t n = static_cast<size_t>(box.site_count());
    std::vector<uint8_t> occ(n, 0), is_strong(n, 0), in_ext(n, 0);
    for (const Site& s : occupied) {
        if (!box.contains(s)) throw std::invalid_argument("external_boundary: site outside box");
        occ[static_cast<size_t>(box.index_of(s))] = 1;
    }
    for (const Site& s : strong) {
        const size_t i = static_cast<size_t>(box.index_of(s));
        if (!occ[i]) throw std::invalid_argument("external_boundary: strong not in occupied");
        is_strong[i] = 1;
    }

    std::vector<int64_t> stack;
    for (int64_t idx = 0; idx < box.site_count(); ++idx) {
        if (!occ[static_cast<size_t>(idx)] && box.on_frame(box.site_at(idx))) {
            if (!in_ext[static_cast<size_t>(idx)]) {
                in_ext[static_cast<size_t>(idx)] = 1;
                stack.push_back(idx);
            }
        }
    }
    while (!stack.empty()) {
        const int64_t idx = stack.back();
        stack.pop_back();
        for (int axis = 0; axis < 2; ++axis) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const int64_t nidx = box.neighbor_index(idx, axis, dir);
                if (nidx < 0) continue;
                if (occ[static_cast<size_t>(nidx)] || in_ext[static_cast<size_t>(nidx)]) continue;
                in_ext[static_cast<size_t>(nidx)] = 1;
                stack.push_back(nidx);
            }
        }
    }

    BoundaryDecomposition out;
    for (int64_t idx = 0; idx < box.site_count(); ++idx) {
        const size_t i = static_cast<size_t>(idx);
        if (in_ext[i]) out.c_ext.push_back(box.site_at(idx));
        if (!occ[i]) continue;
        bool touches = false;
        for (int axis = 0; axis < 2 && !touches; ++axis) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const int64_t nidx = box.neighbor_index(idx, axis, dir);
                if (nidx >= 0 && in_ext[static_cast<size_t>(nidx)]) {
                    touches = true;
                    break;
                }
            }
        }
        if (touches) {
            out.d_ext.push_back(box.site_at(idx));
            if (is_strong[i]) out.d_ext_strong.push_back(box.site_at(idx));
        }
    }
    out.saturated = out.c_ext.empty();
    return out;
}

std::vector<std::vector<Site>> star_components(std::span<const Site> S) {
    require_2d(S);
    const std::vector<Site> sites = dedupe(S);
    std::unordered_set<Site, SiteHash> pending(sites.begin(), sites.end());
    std::vector<std::vector<Site>> components;
    for (const Site& seed : sites) {
        if (!pending.count(seed)) continue;
        std::vector<Site> comp;
        std::vector<Site> stack = {seed};
        pending.erase(seed);
        while (!stack.empty()) {
            const Site x = stack.back();
            stack.pop_back();
            comp.push_back(x);
            for (int dx = -1; dx <= 1; ++dx) {
                for (int dy = -1; dy <= 1; ++dy) {
                    if (dx == 0 && dy == 0) continue;
                    const Site y{x.c[0] + dx, x.c[1] + dy};
                    const auto it = pending.find(y);
                    if (it != pending.end()) {
                        pending.erase(it);
                        stack.push_back(y);
                    }
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
    }
    // `sites` is sorted, so components already appear by smallest member.
    return components;
}

bool dual_edges_connected(std::span<const DualEdge> edges) {
    if (edges.empty()) return false;
    std::unordered_map<DualVertex, std::vector<size_t>, DualVertexHash> incident;
    for (size_t i = 0; i < edges.size(); ++i) {
        incident[edges[i].a].push_back(i);
        incident[edges[i].b].push_back(i);
    }
    std::vector<uint8_t> seen(edges.size(), 0);
    std::vector<size_t> stack = {0};
    seen[0] = 1;
    size_t count = 1;
    while (!stack.empty()) {
        const size_t e = stack.back();
        stack.pop_back();
        for (const DualVertex& v : {edges[e].a, edges[e].b}) {
            for (const size_t j : incident[v]) {
                if (!seen[j]) {
                    seen[j] = 1;
                    ++count;
                    stack.push_back(j);
                }
            }
        }
    }
    return count == edges.size();
}

std::string contour_to_json(const ContourSet& c) {
    std::string out = "[";
    char buf[64];
    for (size_t i = 0; i < c.ordered.size(); ++i) {
        std::snprintf(buf, sizeof buf, "[%.1f,%.1f]", c.ordered[i].x + 0.5, c.ordered[i].y + 0.5);
        out += buf;
        if (i + 1 < c.ordered.size()) out += ",";
    }
    out += "]";
    return out;
}

}  // namespace fpc
