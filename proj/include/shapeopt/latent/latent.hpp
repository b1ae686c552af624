#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shapeopt::latent {

/// One trained code per shape, kept in training order.
struct LatentBank {
    int dim = 0;
    std::vector<std::string> ids;
    std::vector<Eigen::VectorXd> codes;

    [[nodiscard]] std::size_t size() const { return codes.size(); }
    [[nodiscard]] std::optional<Eigen::VectorXd> find(const std::string& id) const;
    /// dim x size() matrix of codes.
    [[nodiscard]] Eigen::MatrixXd as_matrix() const;
    void validate() const;
};

struct SearchBounds {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    [[nodiscard]] Eigen::Index dim() const { return lower.size(); }
    [[nodiscard]] bool contains(const Eigen::VectorXd& x) const;
    [[nodiscard]] Eigen::VectorXd clamp(Eigen::VectorXd x) const;
    void validate() const;
};

/// (1 - t) * a + t * b; returns a for t == 0 and b for t == 1 exactly.
[[nodiscard]] Eigen::VectorXd interpolate(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double t);

/// Per-dimension hull of the codes widened by margin * range on each side. A dimension whose
/// range is below 1e-9 is widened by +-margin * (mean range of the other dimensions), or by
/// +-margin when every dimension is degenerate; with margin 0 it gets +-1e-6 so the box stays open.
[[nodiscard]] SearchBounds derive_bounds(const LatentBank& bank, double margin = 0.2);

} // namespace shapeopt::latent
