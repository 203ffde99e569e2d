#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace apk {

enum class Boundary { Periodic, Neumann };

std::string to_string(Boundary b);

/**
 * Cell-centred, symmetric space / velocity grid plus a uniform time grid.
 *
 *   x_i = -x_max + dx/2 + i*dx,  i = 0..n_x-1,  dx = 2*x_max/n_x
 *   v_j = -v_max + dv/2 + j*dv,  j = 0..n_v-1,  dv = 2*v_max/n_v
 *   t_n = n*dt,                  n = 0..n_t,    dt = t_final/n_t
 *
 * n_x and n_v are even so neither grid has a node at 0. Indices are 0-based.
 * Immutable once built.
 */
class Grid {
public:
    /// Throws ConfigError on odd or non-positive counts and when v_max*dt/dx >= 1.
    /// n_t == 0 is accepted only together with t_final == 0 (empty run).
    static Grid build(double x_max, int n_x, double v_max, int n_v,
                      double t_final, int n_t, Boundary boundary);

    double x_max() const { return x_max_; }
    double v_max() const { return v_max_; }
    double t_final() const { return t_final_; }
    int nx() const { return static_cast<int>(x_.size()); }
    int nv() const { return static_cast<int>(v_.size()); }
    int nt() const { return n_t_; }
    double dx() const { return dx_; }
    double dv() const { return dv_; }
    double dt() const { return dt_; }
    Boundary boundary() const { return boundary_; }

    double x(int i) const { return x_[static_cast<std::size_t>(i)]; }
    double v(int j) const { return v_[static_cast<std::size_t>(j)]; }
    std::span<const double> xs() const { return x_; }
    std::span<const double> vs() const { return v_; }

    /// v_max * dt / dx.
    double cfl() const { return v_max_ * dt_ / dx_; }

    /// Resolves a space index in [-1, n_x] to an interior index according to the
    /// boundary rule (periodic wrap or zero-gradient copy).
    int resolve(int i) const;

    /// Same grid with a different time discretisation (CFL re-checked).
    Grid with_time(double t_final, int n_t) const;

private:
    Grid() = default;

    double x_max_ = 0.0;
    double v_max_ = 0.0;
    double t_final_ = 0.0;
    int n_t_ = 0;
    double dx_ = 0.0;
    double dv_ = 0.0;
    double dt_ = 0.0;
    Boundary boundary_ = Boundary::Periodic;
    std::vector<double> x_;
    std::vector<double> v_;
};

/// Step indices for requested output times (nearest step, sorted, unique).
/// An empty request yields only the final step. Throws ConfigError for times
/// outside [0, t_final].
std::vector<int> snapshot_steps(const Grid& grid, std::span<const double> times);

/// Midpoint velocity quadrature dv * sum_j f_j.
double quadrature(std::span<const double> f, double dv);

enum class EquilibriumKind { Uniform, SingularParabolic, Custom };

std::string to_string(EquilibriumKind k);

/**
 * Velocity equilibrium M sampled on the velocity nodes, normalised so that the
 * discrete average is exactly one. Keeps a copy of the velocity nodes so that
 * Hamiltonian evaluations need only this object.
 */
class Equilibrium {
public:
    /// Uniform or SingularParabolic equilibrium on the grid's velocity nodes.
    static Equilibrium build(EquilibriumKind kind, const Grid& grid);

    /// User-supplied nodal values, rescaled to unit mass. Throws ValidationError
    /// on negative/non-finite values, asymmetry, or fewer than two positive nodes.
    static Equilibrium custom(std::span<const double> values, const Grid& grid);

    EquilibriumKind kind() const { return kind_; }
    /// Factor applied to the raw samples to reach unit mass.
    double normalization() const { return normalization_; }
    std::span<const double> values() const { return m_; }
    double operator[](int j) const { return m_[static_cast<std::size_t>(j)]; }
    int size() const { return static_cast<int>(m_.size()); }

    std::span<const double> velocities() const { return v_; }
    double v(int j) const { return v_[static_cast<std::size_t>(j)]; }
    double dv() const { return dv_; }
    double v_max() const { return v_max_; }
    /// Largest |v_j| on the grid, v_max - dv/2. Edge of the sampled velocity set.
    double v_extent() const { return v_.empty() ? 0.0 : -v_.front(); }

    /// dv * min_j M_j over nodes carrying mass; 1/this bounds e^{-eta/eps}.
    double min_positive_weight() const;
    bool has_zero_nodes() const;

private:
    Equilibrium() = default;
    void finalize(std::vector<double> raw);

    EquilibriumKind kind_ = EquilibriumKind::Uniform;
    double normalization_ = 1.0;
    double dv_ = 0.0;
    double v_max_ = 0.0;
    std::vector<double> m_;
    std::vector<double> v_;
};

/**
 * Row-major (space x velocity) array, used for eta and f.
 */
class PhaseSpaceArray {
public:
    PhaseSpaceArray() = default;
    PhaseSpaceArray(int nx, int nv, double value = 0.0)
        : nx_(nx), nv_(nv), data_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nv), value) {}

    int nx() const { return nx_; }
    int nv() const { return nv_; }

    double& operator()(int i, int j) { return data_[index(i, j)]; }
    double operator()(int i, int j) const { return data_[index(i, j)]; }

    std::span<double> row(int i) { return {data_.data() + index(i, 0), static_cast<std::size_t>(nv_)}; }
    std::span<const double> row(int i) const {
        return {data_.data() + index(i, 0), static_cast<std::size_t>(nv_)};
    }

    std::span<const double> flat() const { return data_; }
    std::span<double> flat() { return data_; }

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(nv_) + static_cast<std::size_t>(j);
    }

    int nx_ = 0;
    int nv_ = 0;
    std::vector<double> data_;
};

}  // namespace apk
