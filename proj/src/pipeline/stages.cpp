#include "shapeopt/pipeline/stages.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "shapeopt/error.hpp"
#include "shapeopt/geometry/mesh_io.hpp"
#include "shapeopt/latent/latent.hpp"
#include "shapeopt/metrics/metrics.hpp"
#include "shapeopt/pipeline/archive.hpp"
#include "shapeopt/training/checkpoint.hpp"
#include "shapeopt/training/reconstruct.hpp"

namespace shapeopt::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

inline constexpr const char* index_format = "shapeopt-sample-index";
inline constexpr const char* index_version = "1";

class Log {
public:
    explicit Log(std::ostream* out) : out_(out) {}

    template <typename T>
    Log& operator<<(const T& value)
    {
        if (out_ != nullptr) *out_ << value;
        return *this;
    }

private:
    std::ostream* out_;
};

void prepare(const RunConfig& cfg, const RunLayout& layout)
{
    cfg.validate();
    std::error_code ec;
    fs::create_directories(layout.root, ec);
    if (ec) throw IoError("cannot create run directory " + layout.root.string() + ": " + ec.message());
    std::ofstream out(layout.resolved_config(), std::ios::trunc);
    if (!out) throw IoError("cannot write " + layout.resolved_config().string());
    out << to_json(cfg);
}

void make_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void require(const fs::path& path, const std::string& stage, const std::string& producer)
{
    if (!fs::exists(path)) {
        throw StageDependencyError("'" + stage + "' needs " + path.string() + ", which is produced by '" + producer +
                                   "'; run that stage first");
    }
}

training::Checkpoint load_model(const RunLayout& layout, const std::string& stage)
{
    require(layout.model(), stage, "train");
    return training::load_checkpoint(layout.model());
}

std::vector<std::string> genome_cells(const Eigen::VectorXd& g)
{
    std::vector<std::string> cells;
    for (Eigen::Index j = 0; j < g.size(); ++j) cells.push_back(format_double(g(j)));
    return cells;
}

void append(std::vector<std::string>& row, const std::vector<std::string>& more)
{
    row.insert(row.end(), more.begin(), more.end());
}

std::vector<std::string> genome_header(Eigen::Index dim)
{
    std::vector<std::string> cells;
    for (Eigen::Index j = 0; j < dim; ++j) cells.push_back("z" + std::to_string(j));
    return cells;
}

std::vector<std::string> objective_cells(const objectives::ObjectiveSet& set, bool feasible, const std::vector<double>& internal)
{
    if (!feasible) return std::vector<std::string>(set.size(), "");
    std::vector<std::string> cells;
    for (double v : set.user_facing(internal)) cells.push_back(format_double(v));
    return cells;
}

std::vector<std::string> read_index(const RunLayout& layout, const std::string& stage)
{
    require(layout.sample_index(), stage, "preprocess");
    std::ifstream in(layout.sample_index());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("sample index is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object() || doc.value("format", std::string{}) != index_format) throw FormatError("sample index has no format header");
    const std::string version = doc.value("version", std::string{});
    if (version != index_version) throw VersionError("sample index version '" + version + "' is not supported");
    try {
        return doc.at("shapes").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw FormatError("sample index is malformed: " + std::string(e.what()));
    }
}

struct InputShape {
    std::string id;
    std::string source;
    std::optional<geometry::TriMesh> mesh;
    std::string problem;
};

std::string as_id(const fs::path& p)
{
    std::string id = p.stem().string();
    for (char& c : id) {
        if (c == ',' || c == ' ' || c == '/' || c == '\\') c = '_';
    }
    return id;
}

} // namespace

std::vector<ShapeReport> cmd_preprocess(const RunConfig& cfg, const StageOptions& options)
{
    const RunLayout layout{cfg.output_dir};
    prepare(cfg, layout);
    Log log(options.log);

    std::vector<InputShape> inputs;
    for (const fs::path& p : cfg.dataset.meshes) {
        InputShape s{as_id(p), p.string(), std::nullopt, {}};
        try {
            s.mesh = geometry::load_mesh(p);
        } catch (const DataError& e) {
            s.problem = e.what();
        }
        inputs.push_back(std::move(s));
    }
    for (auto& shape : geometry::generate_procedural_dataset(cfg.dataset.procedural, derive_seed(cfg.seed, seed_stream::procedural))) {
        inputs.push_back({shape.id, "procedural", std::move(shape.mesh), {}});
    }
    if (inputs.empty()) throw ConfigError("the dataset lists no meshes and no procedural shapes");
    std::set<std::string> ids;
    for (const InputShape& s : inputs) {
        if (!ids.insert(s.id).second) throw ConfigError("two dataset shapes share the id '" + s.id + "'");
    }

    std::vector<ShapeReport> reports;
    std::vector<geometry::TriMesh> normalized(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        InputShape& in = inputs[i];
        ShapeReport r{in.id, in.source, false, 0, 0, 0, in.problem};
        if (in.mesh) {
            r.vertices = in.mesh->vertices.size();
            r.faces = in.mesh->faces.size();
            try {
                geometry::check_indices(*in.mesh);
                const auto wt = geometry::validate_watertight(*in.mesh);
                r.watertight = wt.is_watertight;
                if (!wt.is_watertight) {
                    std::ostringstream why;
                    why << "not watertight (" << wt.boundary_edge_count << " boundary, " << wt.nonmanifold_edge_count
                        << " non-manifold, " << wt.flipped_edge_count << " inconsistently oriented edges)";
                    r.problem = why.str();
                } else {
                    normalized[i] = geometry::center_and_normalize(*in.mesh, cfg.dataset.normalize_radius);
                    if (!(geometry::mesh_volume(normalized[i]) > 0.0)) r.problem = "encloses no positive volume (inverted winding?)";
                }
            } catch (const DataError& e) {
                r.problem = e.what();
            }
        }
        reports.push_back(std::move(r));
    }

    std::size_t invalid = 0;
    for (const ShapeReport& r : reports) {
        if (r.problem.empty()) continue;
        ++invalid;
        log << "invalid shape " << r.id << " (" << r.source << "): " << r.problem << "\n";
    }
    if (invalid > 0 && !options.skip_invalid) {
        throw DataError(std::to_string(invalid) + " invalid input shape(s); fix them or rerun with --skip-invalid");
    }

    make_dir(layout.samples());
    make_dir(layout.input_meshes());
    std::vector<std::string> kept;
    CsvWriter summary(layout.samples() / "summary.csv");
    summary.row({"shape_id", "source", "watertight", "vertices", "faces", "samples", "status"});
    const std::uint64_t sampling_seed = derive_seed(cfg.seed, seed_stream::sampling);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        ShapeReport& r = reports[i];
        if (r.problem.empty()) {
            const auto samples = geometry::sample_sdf(normalized[i], cfg.dataset.samples_per_shape, derive_seed(sampling_seed, i),
                                                      cfg.dataset.sampling, r.id);
            save_samples(samples, layout.samples() / (r.id + ".json"));
            geometry::export_mesh(normalized[i], layout.input_meshes() / (r.id + ".obj"));
            r.samples = samples.size();
            kept.push_back(r.id);
        }
        summary.row({r.id, r.source, r.watertight ? "1" : "0", std::to_string(r.vertices), std::to_string(r.faces),
                     std::to_string(r.samples), r.problem.empty() ? "ok" : "skipped"});
        log << r.id << ": " << (r.watertight ? "watertight" : "NOT watertight") << ", " << r.vertices << " vertices, " << r.faces
            << " faces, " << r.samples << " samples" << (r.problem.empty() ? "" : " (skipped)") << "\n";
    }
    summary.close();

    const json index = {{"format", index_format}, {"version", index_version}, {"shapes", kept}};
    std::ofstream out(layout.sample_index(), std::ios::trunc);
    if (!out) throw IoError("cannot write " + layout.sample_index().string());
    out << index.dump(1) << '\n';
    return reports;
}

void cmd_train(const RunConfig& cfg, const StageOptions& options)
{
    const RunLayout layout{cfg.output_dir};
    prepare(cfg, layout);
    Log log(options.log);

    std::vector<geometry::SdfSampleSet> dataset;
    for (const std::string& id : read_index(layout, "train")) {
        const fs::path p = layout.samples() / (id + ".json");
        require(p, "train", "preprocess");
        dataset.push_back(load_samples(p));
        if (dataset.back().shape_id != id) throw FormatError("sample archive " + p.string() + " holds shape '" + dataset.back().shape_id + "'");
    }

    training::TrainConfig tc = cfg.training;
    tc.seed = derive_seed(cfg.seed, seed_stream::training);
    make_dir(layout.checkpoints());

    const int every = std::max(1, tc.epochs / 10);
    training::TrainResult result;
    try {
        result = training::train(dataset, tc, cfg.architecture, [&](int epoch, const neural::DecoderParams&, const latent::LatentBank&) {
            if ((epoch + 1) % every == 0) log << "epoch " << (epoch + 1) << "/" << tc.epochs << "\n";
        });
    } catch (const training::TrainingDiverged& e) {
        const training::TrainResult& good = e.last_good();
        // the saved state has completed one update fewer than it has recorded losses
        const int completed = good.history.empty() ? 0 : static_cast<int>(good.history.size()) - 1;
        training::save_checkpoint({good.decoder, good.latents, tc, completed, good.history}, layout.last_good());
        log << "training diverged at epoch " << e.epoch() << "; last good state written to " << layout.last_good().string() << "\n";
        throw;
    }

    training::save_checkpoint({result.decoder, result.latents, tc, tc.epochs, result.history}, layout.model());
    CsvWriter loss(layout.checkpoints() / "loss.csv");
    loss.row({"epoch", "total", "clip", "latent", "lipschitz"});
    for (std::size_t e = 0; e < result.history.size(); ++e) {
        const auto& h = result.history[e];
        loss.row({std::to_string(e), format_double(h.total), format_double(h.clip), format_double(h.latent), format_double(h.lipschitz)});
    }
    loss.close();
    if (!result.history.empty()) {
        const auto& last = result.history.back();
        log << "final loss " << last.total << " (clip " << last.clip << ")\n";
    }
}

void cmd_reconstruct(const RunConfig& cfg, const StageOptions& options)
{
    const RunLayout layout{cfg.output_dir};
    prepare(cfg, layout);
    Log log(options.log);
    const training::Checkpoint ck = load_model(layout, "reconstruct");
    const fs::path dir = layout.meshes() / "reconstructed";
    make_dir(dir);

    CsvWriter table(layout.meshes() / "reconstruction.csv");
    table.row({"shape_id", "resolution", "vertices", "faces", "volume", "watertight", "status"});
    const int res = cfg.evaluate.resolution;
    for (std::size_t i = 0; i < ck.latents.size(); ++i) {
        const std::string& id = ck.latents.ids[i];
        try {
            const geometry::TriMesh mesh = training::reconstruct(ck.decoder, ck.latents.codes[i], res);
            geometry::export_mesh(mesh, dir / (id + ".obj"));
            const bool wt = geometry::validate_watertight(mesh).is_watertight;
            table.row({id, std::to_string(res), std::to_string(mesh.vertices.size()), std::to_string(mesh.faces.size()),
                       format_double(geometry::mesh_volume(mesh)), wt ? "1" : "0", "ok"});
            log << id << ": " << mesh.faces.size() << " faces" << (wt ? "" : " (not watertight)") << "\n";
        } catch (const EmptySurfaceError&) {
            table.row({id, std::to_string(res), "0", "0", "0", "0", "empty"});
            log << id << ": empty surface\n";
        }
    }
    table.close();
}

void cmd_evaluate(const RunConfig& cfg, const StageOptions& options)
{
    const RunLayout layout{cfg.output_dir};
    prepare(cfg, layout);
    Log log(options.log);
    const training::Checkpoint ck = load_model(layout, "evaluate");

    const std::uint64_t seed = derive_seed(cfg.seed, seed_stream::metrics);
    const std::size_t n = cfg.evaluate.points;
    std::vector<metrics::PointCloud> generated;
    std::vector<metrics::PointCloud> reference;
    for (std::size_t i = 0; i < ck.latents.size(); ++i) {
        const std::string& id = ck.latents.ids[i];
        const fs::path gt = layout.input_meshes() / (id + ".obj");
        require(gt, "evaluate", "preprocess");
        reference.push_back(metrics::sample_surface(geometry::load_mesh(gt), n, derive_seed(seed, 2 * i), id));
        geometry::TriMesh recon;
        try {
            recon = training::reconstruct(ck.decoder, ck.latents.codes[i], cfg.evaluate.resolution);
        } catch (const EmptySurfaceError&) {
            throw DataError("the reconstruction of '" + id + "' has no surface, so no metrics can be computed");
        }
        generated.push_back(metrics::sample_surface(recon, n, derive_seed(seed, 2 * i + 1), id));
    }

    const Eigen::MatrixXd d = metrics::chamfer_matrix(generated, reference);
    std::vector<double> per_shape;
    CsvWriter shapes(layout.root / "report_shapes.csv");
    shapes.row({"shape_id", "cd", "cd_x1e3"});
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        per_shape.push_back(d(i, i));
        shapes.row({ck.latents.ids[static_cast<std::size_t>(i)], format_double(d(i, i)), format_double(d(i, i) * 1e3)});
    }
    shapes.close();

    const metrics::Summary cd = metrics::summarize(per_shape);
    const double mmd = metrics::mmd_from_matrix(d);
    const double cov = metrics::coverage_from_matrix(d);
    CsvWriter report(layout.report());
    report.row({"metric", "value", "value_x1e3"});
    report.row({"cd_mean", format_double(cd.mean), format_double(cd.mean * 1e3)});
    report.row({"cd_median", format_double(cd.median), format_double(cd.median * 1e3)});
    report.row({"mmd", format_double(mmd), format_double(mmd * 1e3)});
    report.row({"cov", format_double(cov), ""});
    report.close();
    log << "CD mean " << cd.mean * 1e3 << "e-3, median " << cd.median * 1e3 << "e-3, MMD " << mmd * 1e3 << "e-3, COV " << cov << "\n";
}

OptimizeSummary cmd_optimize(const RunConfig& cfg, const StageOptions& options)
{
    const RunLayout layout{cfg.output_dir};
    prepare(cfg, layout);
    Log log(options.log);
    const training::Checkpoint ck = load_model(layout, "optimize");

    const latent::SearchBounds bounds = latent::derive_bounds(ck.latents, cfg.optimize.bounds_margin);
    const objectives::ObjectiveSet set(ck.decoder, cfg.objectives);
    evolution::GaConfig ga = cfg.optimize.ga;
    ga.seed = derive_seed(cfg.seed, seed_stream::optimize);

    OptimizeSummary summary;
    summary.labels = set.labels();
    summary.result = evolution::run_nsga2(set.evaluator(), bounds, ck.latents.codes, ga);
    for (const Eigen::VectorXd& code : ck.latents.codes) summary.training.push_back(set.evaluate(code));
    const auto& result = summary.result;

    const Eigen::Index dim = bounds.dim();
    std::vector<std::string> header = {"generation", "individual"};
    append(header, genome_header(dim));
    append(header, summary.labels);
    append(header, {"rank", "crowding", "feasible"});
    CsvWriter gens(layout.root / "generations.csv");
    gens.row(header);
    for (std::size_t g = 0; g < result.generations.size(); ++g) {
        const auto& pop = result.generations[g];
        for (std::size_t i = 0; i < pop.size(); ++i) {
            const evolution::Individual& ind = pop[i];
            std::vector<std::string> row = {std::to_string(g), std::to_string(i)};
            append(row, genome_cells(ind.genome));
            append(row, objective_cells(set, ind.feasible, ind.objectives));
            append(row, {std::to_string(ind.rank), format_double(ind.crowding), ind.feasible ? "1" : "0"});
            gens.row(row);
        }
    }
    gens.close();

    make_dir(layout.fronts());
    std::vector<evolution::Individual> front = result.archive_front;
    std::sort(front.begin(), front.end(), [](const evolution::Individual& a, const evolution::Individual& b) {
        return std::lexicographical_compare(a.objectives.begin(), a.objectives.end(), b.objectives.begin(), b.objectives.end());
    });
    const fs::path mesh_dir = layout.fronts() / "meshes";
    if (cfg.optimize.export_front_meshes) make_dir(mesh_dir);
    int mesh_res = 8;
    for (const auto& spec : cfg.objectives) mesh_res = std::max(mesh_res, spec.resolution);

    header = {"design"};
    append(header, genome_header(dim));
    append(header, summary.labels);
    header.push_back("mesh");
    CsvWriter front_csv(layout.fronts() / "front.csv");
    front_csv.row(header);
    for (std::size_t i = 0; i < front.size(); ++i) {
        std::vector<std::string> row = {std::to_string(i)};
        append(row, genome_cells(front[i].genome));
        append(row, objective_cells(set, true, front[i].objectives));
        std::string mesh_name;
        if (cfg.optimize.export_front_meshes) {
            mesh_name = "meshes/design_" + std::to_string(i) + ".obj";
            geometry::export_mesh(training::reconstruct(ck.decoder, front[i].genome, mesh_res), layout.fronts() / mesh_name);
        }
        row.push_back(mesh_name);
        front_csv.row(row);
    }
    front_csv.close();

    header = {"shape_id"};
    append(header, genome_header(dim));
    append(header, summary.labels);
    header.push_back("feasible");
    CsvWriter train_csv(layout.fronts() / "training.csv");
    train_csv.row(header);
    for (std::size_t i = 0; i < ck.latents.size(); ++i) {
        std::vector<std::string> row = {ck.latents.ids[i]};
        append(row, genome_cells(ck.latents.codes[i]));
        append(row, objective_cells(set, summary.training[i].feasible, summary.training[i].objectives));
        row.push_back(summary.training[i].feasible ? "1" : "0");
        train_csv.row(row);
    }
    train_csv.close();

    log << result.generations.size() << " generations, " << result.evaluations << " evaluations (" << result.cache_hits
        << " cache hits), " << front.size() << " non-dominated designs\n";
    return summary;
}

void cmd_export(const RunConfig& cfg, const StageOptions& options)
{
    const RunLayout layout{cfg.output_dir};
    prepare(cfg, layout);
    Log log(options.log);
    const training::Checkpoint ck = load_model(layout, "export");

    std::vector<std::string> header = {"shape_id"};
    append(header, genome_header(ck.latents.dim));
    CsvWriter csv(layout.root / "latents.csv");
    csv.row(header);
    const fs::path dir = layout.meshes() / "export";
    make_dir(dir);
    for (std::size_t i = 0; i < ck.latents.size(); ++i) {
        std::vector<std::string> row = {ck.latents.ids[i]};
        append(row, genome_cells(ck.latents.codes[i]));
        csv.row(row);
        try {
            geometry::export_mesh(training::reconstruct(ck.decoder, ck.latents.codes[i], cfg.evaluate.resolution),
                                  dir / (ck.latents.ids[i] + ".obj"));
        } catch (const EmptySurfaceError&) {
            log << ck.latents.ids[i] << ": empty surface, no mesh written\n";
        }
    }
    csv.close();
    log << "exported " << ck.latents.size() << " latent codes\n";
}

} // namespace shapeopt::pipeline
