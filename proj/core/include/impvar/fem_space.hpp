#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "impvar/problem.hpp"

namespace impvar {

/// Piecewise cubic Hermite space on [0, T] with u = u' = 0 at both ends.
///
/// Each node carries a value and a slope dof; the mesh refines every
/// partition segment uniformly so impulse points are always nodes.
class DiscreteSpace {
public:
    struct Element {
        double a = 0.0, b = 0.0, h = 0.0;
        int left = 0;                 // left node index
        int interval = -1;            // active interval index or -1
        std::array<int, 4> dof{};     // free index per local dof, -1 if constrained
        std::vector<double> t, w, eH; // quadrature points, scaled weights, e^{H(t)}
        std::vector<double> phi, dphi, ddphi;  // [q * 4 + k]
    };

    static std::shared_ptr<const DiscreteSpace> build(const Partition& partition, int elements_per_segment,
                                                      const WeightProfile& weights, int quad_points = 7);

    const Partition& partition() const noexcept { return partition_; }
    int elements_per_segment() const noexcept { return eps_; }
    double T() const noexcept { return partition_.T(); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<Element>& elements() const noexcept { return elements_; }
    int n_free() const noexcept { return n_free_; }
    int quad_points() const noexcept { return nq_; }
    double H0() const noexcept { return H0_; }

    /// Free index of the value dof at impulse point k (0-based).
    int impulse_dof(std::size_t k) const { return impulse_dof_[k]; }
    double impulse_weight(std::size_t k) const { return impulse_weight_[k]; }
    std::size_t impulse_count() const noexcept { return impulse_dof_.size(); }

    /// Gram matrix of the weighted norm: K_jk = \int e^H phi_j'' phi_k''.
    const Eigen::MatrixXd& gram() const noexcept { return K_; }
    /// D_jk = \int phi_j' phi_k'.
    const Eigen::MatrixXd& slope_gram() const noexcept { return D_; }
    const Eigen::LLT<Eigen::MatrixXd>& gram_llt() const noexcept { return K_llt_; }

    std::array<double, 4> local(const Eigen::VectorXd& c, const Element& e) const;
    /// Value, first and second derivative at t.
    std::array<double, 3> evaluate(const Eigen::VectorXd& c, double t) const;
    std::size_t element_of(double t) const;

private:
    Partition partition_;
    int eps_ = 1;
    int nq_ = 7;
    int n_free_ = 0;
    double H0_ = 0.0;
    std::vector<double> nodes_;
    std::vector<Element> elements_;
    std::vector<int> impulse_dof_;
    std::vector<double> impulse_weight_;
    Eigen::MatrixXd K_, D_;
    Eigen::LLT<Eigen::MatrixXd> K_llt_;
};

using SpacePtr = std::shared_ptr<const DiscreteSpace>;

/// A discrete field: coefficients over the free dofs of a space.
struct Field {
    SpacePtr space;
    Eigen::VectorXd c;

    Field() = default;
    Field(SpacePtr s, Eigen::VectorXd coeffs);
    static Field zero(SpacePtr s);

    double value(double t) const { return space->evaluate(c, t)[0]; }
    double derivative(double t) const { return space->evaluate(c, t)[1]; }
    double second_derivative(double t) const { return space->evaluate(c, t)[2]; }

    Field operator+(const Field& o) const { return {space, c + o.c}; }
    Field operator-(const Field& o) const { return {space, c - o.c}; }
    Field operator-() const { return {space, -c}; }
    Field operator*(double s) const { return {space, s * c}; }
};

/// Hermite interpolant of (u, u') at the nodes.
Field interpolate(const SpacePtr& space, const std::function<double(double)>& u,
                  const std::function<double(double)>& du);
/// Re-interpolates a field onto another space (exact for nested meshes).
Field transfer(const Field& f, const SpacePtr& target);

double norm_E(const Field& f);
double norm_H2semi(const Field& f);
double norm_L2(const Field& f);
double norm_L2_prime(const Field& f);
double norm_inf(const Field& f);
double norm_inf_prime(const Field& f);
/// sqrt(g^T K^{-1} g) for a gradient vector g.
double dual_norm(const DiscreteSpace& s, const Eigen::VectorXd& g);

/// Random field mixing smooth modes and dof noise; normalised to ||u||_E = 1.
Field random_field(const SpacePtr& space, std::mt19937_64& rng);

struct EmbeddingEntry {
    std::string name;
    double constant = 0.0;
    double worst_ratio = 0.0;  // max lhs / (constant * rhs); must stay <= 1
    bool pass = true;
};

struct EmbeddingReport {
    double T = 0.0;
    double H0 = 0.0;
    int trials = 0;
    std::vector<EmbeddingEntry> entries;
    bool overall() const;
    std::string to_text() const;
};

/// Checks the sup, H^2 and L^2 embedding inequalities on random fields.
EmbeddingReport check_embeddings(const SpacePtr& space, int trials, std::uint64_t seed);

/// CSV rows "t,u,du" at the nodes.
void write_nodal_csv(std::ostream& os, const Field& f);
/// CSV rows "t,u,du" on `per_element` uniform points per element.
void write_dense_csv(std::ostream& os, const Field& f, int per_element = 16);

}  // namespace impvar
