#include "shapeopt/latent/latent.hpp"

#include <algorithm>
#include <string>

#include "shapeopt/error.hpp"

namespace shapeopt::latent {

std::optional<Eigen::VectorXd> LatentBank::find(const std::string& id) const
{
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) return std::nullopt;
    return codes[static_cast<std::size_t>(it - ids.begin())];
}

Eigen::MatrixXd LatentBank::as_matrix() const
{
    Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(codes.size()));
    for (std::size_t i = 0; i < codes.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = codes[i];
    return m;
}

void LatentBank::validate() const
{
    if (dim < 1) throw DataError("latent bank dimension must be >= 1");
    if (ids.size() != codes.size()) throw DataError("latent bank ids and codes differ in count");
    for (const auto& c : codes) {
        if (c.size() != dim) throw DataError("latent code length differs from bank dimension");
    }
}

bool SearchBounds::contains(const Eigen::VectorXd& x) const
{
    return x.size() == lower.size() && (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Eigen::VectorXd SearchBounds::clamp(Eigen::VectorXd x) const
{
    return x.cwiseMax(lower).cwiseMin(upper);
}

void SearchBounds::validate() const
{
    if (lower.size() == 0 || lower.size() != upper.size()) throw ConfigError("search bounds have inconsistent sizes");
    if (!(lower.array() < upper.array()).all()) throw ConfigError("search bounds need lower < upper in every dimension");
}

Eigen::VectorXd interpolate(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double t)
{
    if (a.size() != b.size()) throw ConfigError("cannot interpolate latents of different dimension");
    if (t == 0.0) return a;
    if (t == 1.0) return b;
    return (1.0 - t) * a + t * b;
}

SearchBounds derive_bounds(const LatentBank& bank, double margin)
{
    if (bank.codes.empty()) throw DataError("cannot derive bounds from an empty latent bank");
    if (bank.codes.size() < 2) throw DataError("deriving bounds needs at least two codes");
    if (!(margin >= 0.0)) throw ConfigError("bounds margin must be >= 0");
    bank.validate();

    const Eigen::MatrixXd m = bank.as_matrix();
    const Eigen::VectorXd lo = m.rowwise().minCoeff();
    const Eigen::VectorXd hi = m.rowwise().maxCoeff();
    const Eigen::VectorXd range = hi - lo;

    double range_sum = 0.0;
    int open_dims = 0;
    for (Eigen::Index j = 0; j < range.size(); ++j) {
        if (range(j) >= 1e-9) {
            range_sum += range(j);
            ++open_dims;
        }
    }
    const double mean_range = open_dims > 0 ? range_sum / open_dims : 1.0;

    SearchBounds bounds;
    bounds.lower.resize(bank.dim);
    bounds.upper.resize(bank.dim);
    for (Eigen::Index j = 0; j < range.size(); ++j) {
        double pad = range(j) >= 1e-9 ? margin * range(j) : margin * mean_range;
        if (range(j) < 1e-9 && pad <= 0.0) pad = 1e-6;
        bounds.lower(j) = lo(j) - pad;
        bounds.upper(j) = hi(j) + pad;
    }
    return bounds;
}

} // namespace shapeopt::latent
