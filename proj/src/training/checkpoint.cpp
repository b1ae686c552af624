#include "shapeopt/training/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "shapeopt/error.hpp"

namespace shapeopt::training {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m)
{
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const json& j)
{
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto flat = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(flat.size()) != rows * cols) {
        throw FormatError("checkpoint array shape does not match its data length");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    }
    return m;
}

} // namespace

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path)
{
    json layers = json::array();
    for (const auto& l : ck.decoder.layers) {
        layers.push_back({{"weight", matrix_to_json(l.weight)}, {"bias", matrix_to_json(l.bias)}, {"k", l.k}});
    }
    json codes = json::array();
    for (const auto& c : ck.latents.codes) codes.push_back(std::vector<double>(c.data(), c.data() + c.size()));

    json history = {{"total", json::array()}, {"clip", json::array()}, {"latent", json::array()}, {"lipschitz", json::array()}};
    for (const auto& h : ck.history) {
        history["total"].push_back(h.total);
        history["clip"].push_back(h.clip);
        history["latent"].push_back(h.latent);
        history["lipschitz"].push_back(h.lipschitz);
    }

    const TrainConfig& c = ck.config;
    const json doc = {
        {"format", checkpoint_format},
        {"version", checkpoint_version},
        {"config",
         {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr_weights", c.lr_weights},
          {"lr_latents", c.lr_latents},
          {"delta", c.delta},
          {"w_ad", c.w_ad},
          {"latent_init_std", c.latent_init_std},
          {"seed", c.seed}}},
        {"epoch", ck.epoch},
        {"decoder",
         {{"encoding", {{"levels", ck.decoder.encoding.levels}, {"include_input", ck.decoder.encoding.include_input}}},
          {"latent_dim", ck.decoder.latent_dim},
          {"output_scale", ck.decoder.output_scale},
          {"layers", layers}}},
        {"latents", {{"dim", ck.latents.dim}, {"ids", ck.latents.ids}, {"codes", codes}}},
        {"loss_history", history},
    };

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out << doc.dump(1) << '\n';
    if (!out) throw IoError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || doc.value("format", std::string{}) != checkpoint_format) {
        throw FormatError(path.string() + " is not a checkpoint (missing format header)");
    }
    const std::string version = doc.value("version", std::string{});
    if (version != checkpoint_version) {
        throw VersionError("checkpoint version '" + version + "' is not supported (expected '" + checkpoint_version + "')");
    }

    Checkpoint ck;
    try {
        const json& c = doc.at("config");
        ck.config.epochs = c.at("epochs").get<int>();
        ck.config.batch_size = c.at("batch_size").get<int>();
        ck.config.lr_weights = c.at("lr_weights").get<double>();
        ck.config.lr_latents = c.at("lr_latents").get<double>();
        ck.config.delta = c.at("delta").get<double>();
        ck.config.w_ad = c.at("w_ad").get<double>();
        ck.config.latent_init_std = c.at("latent_init_std").get<double>();
        ck.config.seed = c.at("seed").get<std::uint64_t>();
        ck.epoch = doc.at("epoch").get<int>();

        const json& d = doc.at("decoder");
        ck.decoder.encoding.levels = d.at("encoding").at("levels").get<int>();
        ck.decoder.encoding.include_input = d.at("encoding").at("include_input").get<bool>();
        ck.decoder.latent_dim = d.at("latent_dim").get<int>();
        ck.decoder.output_scale = d.at("output_scale").get<double>();
        for (const json& l : d.at("layers")) {
            neural::LipschitzLayer layer;
            layer.weight = matrix_from_json(l.at("weight"));
            layer.bias = matrix_from_json(l.at("bias"));
            layer.k = l.at("k").get<double>();
            ck.decoder.layers.push_back(std::move(layer));
        }

        const json& z = doc.at("latents");
        ck.latents.dim = z.at("dim").get<int>();
        ck.latents.ids = z.at("ids").get<std::vector<std::string>>();
        for (const json& code : z.at("codes")) {
            const auto v = code.get<std::vector<double>>();
            ck.latents.codes.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
        }

        const json& h = doc.at("loss_history");
        const auto total = h.at("total").get<std::vector<double>>();
        const auto clip = h.at("clip").get<std::vector<double>>();
        const auto lat = h.at("latent").get<std::vector<double>>();
        const auto lip = h.at("lipschitz").get<std::vector<double>>();
        if (clip.size() != total.size() || lat.size() != total.size() || lip.size() != total.size()) {
            throw FormatError("checkpoint loss history columns differ in length");
        }
        for (std::size_t i = 0; i < total.size(); ++i) ck.history.push_back({clip[i], lat[i], lip[i], total[i]});
    } catch (const json::exception& e) {
        throw FormatError("checkpoint " + path.string() + " is malformed: " + e.what());
    }

    try {
        ck.decoder.validate();
        ck.latents.validate();
    } catch (const Error& e) {
        throw FormatError(std::string("checkpoint is inconsistent: ") + e.what());
    }
    if (ck.latents.dim != ck.decoder.latent_dim) throw FormatError("checkpoint latent dimension disagrees with decoder");
    return ck;
}

} // namespace shapeopt::training
