#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpc {

/// Maximum lattice dimension supported by the site representation.
inline constexpr int kMaxDim = 4;

/// A point of Z^d, d <= kMaxDim. Unused coordinates are zero, so
/// comparison and hashing can ignore the dimension tag.
struct Site {
    std::array<int32_t, kMaxDim> c{};
    int8_t dim = 0;

    Site() = default;
    Site(std::initializer_list<int32_t> coords) {
        dim = static_cast<int8_t>(coords.size());
        int i = 0;
        for (int32_t v : coords) c[i++] = v;
    }
    static Site zero(int d) {
        Site s;
        s.dim = static_cast<int8_t>(d);
        return s;
    }

    int32_t operator[](int i) const { return c[i]; }
    int32_t& operator[](int i) { return c[i]; }

    friend bool operator==(const Site& a, const Site& b) {
        return a.dim == b.dim && a.c == b.c;
    }
    /// Lexicographic order on coordinates.
    friend bool operator<(const Site& a, const Site& b) { return a.c < b.c; }

    Site shifted(int axis, int32_t delta) const {
        Site s = *this;
        s.c[axis] += delta;
        return s;
    }
};

struct SiteHash {
    size_t operator()(const Site& s) const {
        uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (int i = 0; i < s.dim; ++i) {
            h ^= static_cast<uint64_t>(static_cast<uint32_t>(s.c[i])) + 0x9e3779b9ULL +
                 (h << 6) + (h >> 2);
        }
        return static_cast<size_t>(h);
    }
};

/// Nearest-neighbor edge with canonical endpoint order (a < b
/// lexicographically; for unit edges this means b = a + e_axis).
struct Edge {
    Site a;
    Site b;

    /// Axis along which the edge runs.
    int axis() const {
        for (int i = 0; i < a.dim; ++i)
            if (a.c[i] != b.c[i]) return i;
        return -1;
    }
    friend bool operator==(const Edge& x, const Edge& y) { return x.a == y.a && x.b == y.b; }
};

/// Canonical edge between two neighboring sites, in either input order.
Edge edge_between(const Site& x, const Site& y);

/// The 2d nearest neighbors of x, in the order +e1, -e1, +e2, -e2, ...
std::vector<Site> neighbors(const Site& x);

/// Finite truncation of Z^d: all sites with ||x||_inf <= L.
/// Provides a dense flat index whose order matches lexicographic site
/// order (coordinate 0 most significant).
class Box {
public:
    Box(int d, int32_t radius);

    int dim() const { return d_; }
    int32_t radius() const { return L_; }
    int64_t site_count() const { return count_; }

    bool contains(const Site& s) const {
        if (s.dim != d_) return false;
        for (int i = 0; i < d_; ++i)
            if (s.c[i] < -L_ || s.c[i] > L_) return false;
        return true;
    }

    /// True when s lies on the frame ||s||_inf == L (the finite surrogate
    /// of "infinity" throughout the project).
    bool on_frame(const Site& s) const {
        bool frame = false;
        for (int i = 0; i < d_; ++i) {
            if (s.c[i] == -L_ || s.c[i] == L_) frame = true;
        }
        return frame;
    }

    int64_t index_of(const Site& s) const {
        int64_t idx = 0;
        for (int i = 0; i < d_; ++i) idx = idx * side_ + (s.c[i] + L_);
        return idx;
    }

    Site site_at(int64_t idx) const {
        Site s = Site::zero(d_);
        for (int i = d_ - 1; i >= 0; --i) {
            s.c[i] = static_cast<int32_t>(idx % side_) - L_;
            idx /= side_;
        }
        return s;
    }

    /// Flat index of the neighbor of idx along +-axis, or -1 if outside.
    int64_t neighbor_index(int64_t idx, int axis, int dir) const {
        const int64_t stride = strides_[axis];
        const int32_t coord = static_cast<int32_t>((idx / stride) % side_) - L_;
        const int32_t moved = coord + dir;
        if (moved < -L_ || moved > L_) return -1;
        return idx + dir * stride;
    }

    int64_t stride(int axis) const { return strides_[axis]; }

    /// Visit every frame site (||s||_inf == L) once, in no particular order
    /// beyond determinism. Corner sites are visited once.
    template <typename Fn>
    void for_each_frame_site(Fn&& fn) const {
        Site s = Site::zero(d_);
        for (int face = 0; face < d_; ++face) {
            for (int sign = -1; sign <= 1; sign += 2) {
                s.c[face] = sign * L_;
                // Free axes range over the full side, except earlier axes
                // skip the +-L values already covered by their own faces.
                visit_face(s, face, 0, fn);
            }
        }
    }

private:
    template <typename Fn>
    void visit_face(Site& s, int face, int axis, Fn&& fn) const {
        if (axis == d_) {
            fn(static_cast<const Site&>(s));
            return;
        }
        if (axis == face) {
            visit_face(s, face, axis + 1, fn);
            return;
        }
        const int32_t lo = (axis < face) ? -L_ + 1 : -L_;
        const int32_t hi = (axis < face) ? L_ - 1 : L_;
        for (int32_t v = lo; v <= hi; ++v) {
            s.c[axis] = v;
            visit_face(s, face, axis + 1, fn);
        }
        s.c[axis] = 0;
    }


    int d_;
    int32_t L_;
    int64_t side_;
    int64_t count_;
    std::array<int64_t, kMaxDim> strides_{};
};

// ---------------------------------------------------------------------------
// Real vectors and norms

using Vec = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm_l2(std::span<const double> v);

Vec to_vec(const Site& s);

/// Norm handle: every geometric operation (cylinders, shells, covers,
/// balls) is generic over the norm so that l1/l2/linf and empirical
/// passage-time norms go through the same code.
struct Norm {
    std::string name;
    std::function<double(std::span<const double>)> eval;

    double operator()(std::span<const double> v) const { return eval(v); }
    double operator()(const Site& s) const {
        std::array<double, kMaxDim> buf{};
        for (int i = 0; i < s.dim; ++i) buf[i] = s.c[i];
        return eval(std::span<const double>(buf.data(), s.dim));
    }
};

Norm make_norm_l1();
Norm make_norm_l2();
Norm make_norm_linf();

// ---------------------------------------------------------------------------
// Cylinders

/// Cyl_z(x_hat, R, h): sites y with dist(y-z, R*x_hat line) <= R and
/// 0 <= <y-z, x_hat> <= h. half_infinite drops the upper height bound,
/// bi_infinite drops both axial bounds.
struct Cylinder {
    Vec base;        // z
    Vec axis;        // unit l2 vector
    double radius = 0.0;
    double height = 0.0;  // ignored when half_infinite or bi_infinite
    bool half_infinite = false;
    bool bi_infinite = false;

    static Cylinder segment(Vec z, Vec axis_unit, double R, double h);
    static Cylinder half(Vec z, Vec axis_unit, double R);
    static Cylinder line(Vec axis_unit, double R);
};

/// Boundary tolerance for cylinder membership; the definitions use closed
/// inequalities and sites exactly on the boundary are included.
inline constexpr double kCylinderTol = 1e-9;

bool cylinder_contains(const Site& y, const Cylinder& c);
bool cylinder_contains(std::span<const double> y, const Cylinder& c);

// ---------------------------------------------------------------------------
// Shells (direction cone x radial band, in a reference norm)

/// Shell(A, r, r'): sites x with x/||x|| in the direction set A and
/// r <= ||x|| <= r'. A is a finite set of unit vectors enlarged by phi:
/// membership means some a in A has ||x/||x|| - a|| <= phi.
struct ShellSpec {
    std::vector<Vec> directions;  // unit vectors of `norm`
    double r = 0.0;
    double r_prime = 0.0;
    double enlargement = 0.0;  // phi of the A (+) phi operation
    Norm norm;
};

bool shell_contains(const Site& x, const ShellSpec& s);

// ---------------------------------------------------------------------------
// Sphere covers and direction geometry

struct SphereCover {
    std::vector<Vec> centers;  // unit vectors of `norm_name`
    double epsilon = 0.0;
    int dim = 0;
    std::string norm_name;
    /// Implementation constant: centers.size() <= bound_constant*(1+1/eps)^(d-1).
    double bound_constant = 0.0;
};

/// Deterministic epsilon-cover of the unit sphere of `norm` by points on
/// the sphere: equiangular for d=2, spiral for d=3, axis-aligned grid
/// faces for d>3 (all built on the l2 sphere and renormalized, with the
/// epsilon budget split so the cover property holds in the target norm).
SphereCover sphere_cover(double epsilon, const Norm& norm, int d);

/// || x/|x| - y/|y| || in the given norm. Rejects zero vectors.
double direction_gap(std::span<const double> x, std::span<const double> y, const Norm& norm);

/// Normalize to the unit sphere of `norm`.
Vec normalized(std::span<const double> x, const Norm& norm);

}  // namespace fpc
