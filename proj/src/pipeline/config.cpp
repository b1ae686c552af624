#include "shapeopt/pipeline/config.hpp"

#include <concepts>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "shapeopt/error.hpp"

namespace shapeopt::pipeline {

using nlohmann::json;

namespace {

/// A JSON object whose keys must all be consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    [[nodiscard]] const json* find(const std::string& key)
    {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void read(const std::string& key, int& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
            const auto wide = v->get<long long>();
            if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max()) {
                throw ConfigError(where(key) + " is out of range");
            }
            out = static_cast<int>(wide);
        }
    }

    template <std::unsigned_integral T>
    void read(const std::string& key, T& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
            out = v->get<T>();
        }
    }

    void read(const std::string& key, double& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(where(key) + " must be a number");
            out = v->get<double>();
        }
    }

    void read(const std::string& key, bool& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(where(key) + " must be true or false");
            out = v->get<bool>();
        }
    }

    void read(const std::string& key, std::string& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
            out = v->get<std::string>();
        }
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError("unknown key " + where(key));
        }
    }

    [[nodiscard]] std::string where(const std::string& key = {}) const
    {
        if (key.empty()) return "'" + path_ + "'";
        return "'" + (path_.empty() ? key : path_ + "." + key) + "'";
    }

    [[nodiscard]] std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

geometry::Axis parse_axis(const std::string& text, const std::string& where)
{
    if (text == "x") return geometry::Axis::X;
    if (text == "y") return geometry::Axis::Y;
    if (text == "z") return geometry::Axis::Z;
    throw ConfigError(where + " must be one of x, y, z");
}

std::string axis_name(geometry::Axis axis)
{
    switch (axis) {
    case geometry::Axis::X: return "x";
    case geometry::Axis::Y: return "y";
    case geometry::Axis::Z: return "z";
    }
    return "?";
}

void parse_dataset(const json& j, DatasetConfig& out, const std::filesystem::path& base_dir)
{
    Section s(j, "dataset");
    if (const json* meshes = s.find("meshes")) {
        if (!meshes->is_array()) throw ConfigError("'dataset.meshes' must be a list of paths");
        for (const json& m : *meshes) {
            if (!m.is_string()) throw ConfigError("'dataset.meshes' must be a list of paths");
            std::filesystem::path p = m.get<std::string>();
            out.meshes.push_back(p.is_relative() && !base_dir.empty() ? base_dir / p : p);
        }
    }
    if (const json* fams = s.find("procedural")) {
        if (!fams->is_array()) throw ConfigError("'dataset.procedural' must be a list");
        for (std::size_t i = 0; i < fams->size(); ++i) {
            Section f((*fams)[i], "dataset.procedural[" + std::to_string(i) + "]");
            geometry::ProceduralFamilySpec spec;
            f.read("family", spec.family);
            f.read("count", spec.count);
            if (const json* ranges = f.find("ranges")) {
                if (!ranges->is_object()) throw ConfigError(f.where("ranges") + " must be an object");
                for (const auto& [name, range] : ranges->items()) {
                    if (range.is_number()) {
                        spec.ranges[name] = {range.get<double>(), range.get<double>()};
                    } else if (range.is_array() && range.size() == 2 && range[0].is_number() && range[1].is_number()) {
                        spec.ranges[name] = {range[0].get<double>(), range[1].get<double>()};
                    } else {
                        throw ConfigError(f.where("ranges." + name) + " must be a number or [lo, hi]");
                    }
                }
            }
            f.finish();
            if (spec.family.empty()) throw ConfigError(f.where("family") + " is required");
            out.procedural.push_back(std::move(spec));
        }
    }
    s.read("samples_per_shape", out.samples_per_shape);
    s.read("normalize_radius", out.normalize_radius);
    if (const json* sampling = s.find("sampling")) {
        Section t(*sampling, "dataset.sampling");
        t.read("surface_fraction", out.sampling.surface_fraction);
        t.read("sigma_fine", out.sampling.sigma_fine);
        t.read("sigma_coarse", out.sampling.sigma_coarse);
        t.finish();
    }
    s.finish();
}

void parse_architecture(const json& j, neural::ArchitectureConfig& out)
{
    Section s(j, "architecture");
    s.read("latent_dim", out.latent_dim);
    s.read("hidden_layers", out.hidden_layers);
    s.read("hidden_width", out.hidden_width);
    s.read("encoding_levels", out.encoding.levels);
    s.read("include_input", out.encoding.include_input);
    s.finish();
}

void parse_training(const json& j, training::TrainConfig& out)
{
    Section s(j, "training");
    s.read("epochs", out.epochs);
    s.read("batch_size", out.batch_size);
    s.read("lr_weights", out.lr_weights);
    s.read("lr_latents", out.lr_latents);
    s.read("delta", out.delta);
    s.read("w_ad", out.w_ad);
    s.read("latent_init_std", out.latent_init_std);
    s.finish();
}

void parse_optimize(const json& j, OptimizeConfig& out)
{
    Section s(j, "optimize");
    evolution::GaConfig& ga = out.ga;
    s.read("population_size", ga.population_size);
    s.read("generations", ga.generations);
    s.read("crossover_probability", ga.crossover_probability);
    if (const json* pm = s.find("mutation_probability")) {
        if (pm->is_string() && pm->get<std::string>() == "auto") {
            ga.mutation_probability = -1.0;
        } else if (pm->is_number() && pm->get<double>() >= 0.0) {
            ga.mutation_probability = pm->get<double>();
        } else {
            throw ConfigError(s.where("mutation_probability") + " must be \"auto\" or a number in [0,1]");
        }
    }
    s.read("eta_c", ga.eta_c);
    s.read("eta_m", ga.eta_m);
    s.read("parallel_evaluation", ga.parallel_evaluation);
    s.read("hv_early_stop", ga.hv_early_stop);
    s.read("hv_patience", ga.hv_patience);
    s.read("hv_tolerance", ga.hv_tolerance);
    if (const json* ref = s.find("hv_reference")) {
        if (!ref->is_array()) throw ConfigError(s.where("hv_reference") + " must be a list of numbers");
        ga.hv_reference.clear();
        for (const json& v : *ref) {
            if (!v.is_number()) throw ConfigError(s.where("hv_reference") + " must be a list of numbers");
            ga.hv_reference.push_back(v.get<double>());
        }
    }
    s.read("bounds_margin", out.bounds_margin);
    s.read("export_front_meshes", out.export_front_meshes);
    s.finish();
}

objectives::ObjectiveSpec parse_objective(const json& j, const std::string& path)
{
    Section s(j, path);
    objectives::ObjectiveSpec spec;
    std::string kind;
    s.read("kind", kind);
    if (kind.empty()) throw ConfigError(s.where("kind") + " is required");
    spec.kind = objectives::parse_kind(kind);
    spec.name = kind;
    spec.direction = objectives::default_direction(spec.kind);
    s.read("name", spec.name);
    std::string direction;
    s.read("direction", direction);
    if (direction == "minimize") spec.direction = objectives::Direction::Minimize;
    else if (direction == "maximize") spec.direction = objectives::Direction::Maximize;
    else if (!direction.empty()) throw ConfigError(s.where("direction") + " must be minimize or maximize");
    s.read("density", spec.density);
    std::string axis;
    s.read("axis", axis);
    if (!axis.empty()) spec.axis = parse_axis(axis, s.where("axis"));
    s.read("resolution", spec.resolution);
    s.read("raster_resolution", spec.raster_resolution);
    s.read("command", spec.command);
    s.read("count", spec.count);
    s.finish();
    return spec;
}

std::vector<objectives::ObjectiveSpec> default_objectives()
{
    objectives::ObjectiveSpec mass;
    mass.name = "mass";
    mass.kind = objectives::ObjectiveKind::Mass;
    objectives::ObjectiveSpec stiffness;
    stiffness.name = "stiffness";
    stiffness.kind = objectives::ObjectiveKind::Stiffness;
    stiffness.direction = objectives::Direction::Maximize;
    return {mass, stiffness};
}

} // namespace

void RunConfig::validate() const
{
    if (dataset.samples_per_shape < 100) throw ConfigError("dataset.samples_per_shape must be >= 100");
    if (!(dataset.normalize_radius > 0.0 && dataset.normalize_radius <= 1.0)) {
        throw ConfigError("dataset.normalize_radius must lie in (0, 1]");
    }
    const auto& smp = dataset.sampling;
    if (!(smp.surface_fraction >= 0.0 && smp.surface_fraction <= 1.0)) throw ConfigError("dataset.sampling.surface_fraction must lie in [0, 1]");
    if (!(smp.sigma_fine > 0.0) || !(smp.sigma_coarse > 0.0)) throw ConfigError("dataset.sampling sigmas must be positive");
    for (const auto& f : dataset.procedural) {
        if (f.count < 1) throw ConfigError("procedural family '" + f.family + "' needs count >= 1");
    }
    if (architecture.latent_dim < 1) throw ConfigError("architecture.latent_dim must be >= 1");
    if (architecture.hidden_layers < 1) throw ConfigError("architecture.hidden_layers must be >= 1");
    if (architecture.hidden_width < 1) throw ConfigError("architecture.hidden_width must be >= 1");
    if (architecture.encoding.levels < 0) throw ConfigError("architecture.encoding_levels must be >= 0");
    if (architecture.encoding.dim() == 0) throw ConfigError("the encoding must produce at least one feature");
    training.validate();
    optimize.ga.validate();
    if (!(optimize.bounds_margin >= 0.0)) throw ConfigError("optimize.bounds_margin must be >= 0");
    if (evaluate.resolution < 8) throw ConfigError("evaluate.resolution must be >= 8");
    if (evaluate.points < 1) throw ConfigError("evaluate.points must be >= 1");
    if (objectives.empty()) throw ConfigError("at least one objective is required");
    std::set<std::string> names;
    for (const auto& o : objectives) {
        o.validate();
        if (!names.insert(o.name).second) throw ConfigError("duplicate objective name '" + o.name + "'");
    }
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    cfg.objectives = default_objectives();
    Section root(doc, "");
    root.read("seed", cfg.seed);
    std::string out_dir;
    root.read("output_dir", out_dir);
    if (!out_dir.empty()) {
        std::filesystem::path p = out_dir;
        cfg.output_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (const json* j = root.find("dataset")) parse_dataset(*j, cfg.dataset, base_dir);
    if (const json* j = root.find("architecture")) parse_architecture(*j, cfg.architecture);
    if (const json* j = root.find("training")) parse_training(*j, cfg.training);
    if (const json* j = root.find("optimize")) parse_optimize(*j, cfg.optimize);
    if (const json* j = root.find("objectives")) {
        if (!j->is_array()) throw ConfigError("'objectives' must be a list");
        cfg.objectives.clear();
        for (std::size_t i = 0; i < j->size(); ++i) cfg.objectives.push_back(parse_objective((*j)[i], "objectives[" + std::to_string(i) + "]"));
    }
    if (const json* j = root.find("evaluate")) {
        Section s(*j, "evaluate");
        s.read("resolution", cfg.evaluate.resolution);
        s.read("points", cfg.evaluate.points);
        s.finish();
    }
    root.finish();
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

void apply_overrides(RunConfig& cfg, const Overrides& o)
{
    if (o.seed) cfg.seed = *o.seed;
    if (o.output_dir) cfg.output_dir = *o.output_dir;
    if (o.bounds_margin) cfg.optimize.bounds_margin = *o.bounds_margin;
    if (o.resolution) {
        cfg.evaluate.resolution = *o.resolution;
        for (auto& spec : cfg.objectives) spec.resolution = *o.resolution;
    }
    cfg.validate();
}

std::string to_json(const RunConfig& cfg)
{
    json meshes = json::array();
    for (const auto& m : cfg.dataset.meshes) meshes.push_back(m.string());
    json procedural = json::array();
    for (const auto& f : cfg.dataset.procedural) {
        json ranges = json::object();
        for (const auto& [name, r] : f.ranges) ranges[name] = {r.first, r.second};
        procedural.push_back({{"family", f.family}, {"count", f.count}, {"ranges", ranges}});
    }
    const auto& ga = cfg.optimize.ga;
    json objectives = json::array();
    for (const auto& o : cfg.objectives) {
        json j = {{"name", o.name},
                  {"kind", objectives::to_string(o.kind)},
                  {"direction", o.direction == objectives::Direction::Maximize ? "maximize" : "minimize"},
                  {"density", o.density},
                  {"axis", axis_name(o.axis)},
                  {"resolution", o.resolution},
                  {"raster_resolution", o.raster_resolution}};
        if (o.kind == objectives::ObjectiveKind::External) {
            j["command"] = o.command;
            j["count"] = o.count;
        }
        objectives.push_back(std::move(j));
    }
    const json doc = {
        {"seed", cfg.seed},
        {"output_dir", cfg.output_dir.string()},
        {"dataset",
         {{"meshes", meshes},
          {"procedural", procedural},
          {"samples_per_shape", cfg.dataset.samples_per_shape},
          {"normalize_radius", cfg.dataset.normalize_radius},
          {"sampling",
           {{"surface_fraction", cfg.dataset.sampling.surface_fraction},
            {"sigma_fine", cfg.dataset.sampling.sigma_fine},
            {"sigma_coarse", cfg.dataset.sampling.sigma_coarse}}}}},
        {"architecture",
         {{"latent_dim", cfg.architecture.latent_dim},
          {"hidden_layers", cfg.architecture.hidden_layers},
          {"hidden_width", cfg.architecture.hidden_width},
          {"encoding_levels", cfg.architecture.encoding.levels},
          {"include_input", cfg.architecture.encoding.include_input}}},
        {"training",
         {{"epochs", cfg.training.epochs},
          {"batch_size", cfg.training.batch_size},
          {"lr_weights", cfg.training.lr_weights},
          {"lr_latents", cfg.training.lr_latents},
          {"delta", cfg.training.delta},
          {"w_ad", cfg.training.w_ad},
          {"latent_init_std", cfg.training.latent_init_std}}},
        {"optimize",
         {{"population_size", ga.population_size},
          {"generations", ga.generations},
          {"crossover_probability", ga.crossover_probability},
          {"mutation_probability", ga.mutation_probability < 0.0 ? json("auto") : json(ga.mutation_probability)},
          {"eta_c", ga.eta_c},
          {"eta_m", ga.eta_m},
          {"parallel_evaluation", ga.parallel_evaluation},
          {"hv_early_stop", ga.hv_early_stop},
          {"hv_patience", ga.hv_patience},
          {"hv_tolerance", ga.hv_tolerance},
          {"hv_reference", ga.hv_reference},
          {"bounds_margin", cfg.optimize.bounds_margin},
          {"export_front_meshes", cfg.optimize.export_front_meshes}}},
        {"objectives", objectives},
        {"evaluate", {{"resolution", cfg.evaluate.resolution}, {"points", cfg.evaluate.points}}},
    };
    return doc.dump(2) + "\n";
}

} // namespace shapeopt::pipeline
