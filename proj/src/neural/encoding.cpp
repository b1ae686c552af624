#include "shapeopt/neural/encoding.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "shapeopt/error.hpp"

namespace shapeopt::neural {

namespace {

void encode_into(const Vec3& p, const EncodingConfig& cfg, double* out)
{
    int row = 0;
    if (cfg.include_input) {
        for (int c = 0; c < 3; ++c) out[row++] = p[c];
    }
    for (int c = 0; c < 3; ++c) {
        double freq = std::numbers::pi;
        for (int j = 0; j < cfg.levels; ++j) {
            out[row++] = std::sin(freq * p[c]);
            out[row++] = std::cos(freq * p[c]);
            freq *= 2.0;
        }
    }
}

void check(const EncodingConfig& cfg)
{
    if (cfg.levels < 0) throw ConfigError("encoding levels must be >= 0, got " + std::to_string(cfg.levels));
    if (cfg.dim() == 0) throw ConfigError("encoding with zero levels must include the raw input");
}

} // namespace

Eigen::VectorXd positional_encoding(const Vec3& p, const EncodingConfig& cfg)
{
    check(cfg);
    Eigen::VectorXd out(cfg.dim());
    encode_into(p, cfg, out.data());
    return out;
}

Eigen::MatrixXd positional_encoding(const Eigen::Matrix3Xd& points, const EncodingConfig& cfg)
{
    check(cfg);
    Eigen::MatrixXd out(cfg.dim(), points.cols());
    for (Eigen::Index b = 0; b < points.cols(); ++b) encode_into(points.col(b), cfg, out.col(b).data());
    return out;
}

} // namespace shapeopt::neural
