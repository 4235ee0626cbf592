#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "srland/errors.hpp"
#include "srland/export.hpp"
#include "srland/image.hpp"
#include "srland/metrics.hpp"
#include "srland/npy.hpp"
#include "srland/pipeline.hpp"
#include "srland/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct IoPaths {
    std::string input;
    std::string gt;
    std::string output_dir = ".";
    std::string dataset;  // optional explicit id; defaults to the input stem
};

std::string dataset_id(const IoPaths& io) {
    if (!io.dataset.empty()) return io.dataset;
    if (io.input.empty()) return "synthetic";
    return fs::path(io.input).stem().string();
}

void add_config_flags(CLI::App* cmd, srland::RunConfig& config) {
    cmd->add_option("--graph", config.graph_mode, "graph construction: spatial | knn")
        ->check(CLI::IsMember({"spatial", "knn"}));
    cmd->add_option("--radius", config.radius,
                    "spatial radius in pixels (0 = preset: salinas 11, indian 14, else 3)");
    cmd->add_option("--kg", config.kg, "spectral graph neighbor count (0 = ceil(log2 n))");
    cmd->add_option("--sampler", config.sampler, "query strategy: core | boundary | random")
        ->check(CLI::IsMember({"core", "boundary", "random"}));
    cmd->add_option("--t", config.t, "diffusion time (nonnegative integer)");
    cmd->add_option("--m", config.m, "number of eigenpairs (clamped to n)");
    cmd->add_option("--kde-k", config.kde_k, "density estimation neighbor count");
    cmd->add_option("--budget", config.budget, "label query budget L");
    cmd->add_flag("--ensure-coverage,!--no-ensure-coverage", config.ensure_coverage,
                  "extend core sampling until every class has a label");
    cmd->add_option("--consensus-threshold", config.consensus_threshold,
                    "spatial majority share required for consensus (in [0,1])");
    cmd->add_option("--sigma", config.sigma, "kernel bandwidth (0 = mean retained-edge distance)");
    cmd->add_option("--noise-variance", config.noise_variance,
                    "variance of the Gaussian preprocessing noise");
    cmd->add_option("--seed", config.seed, "root seed; all randomness derives from it");
}

json config_to_json(const srland::RunConfig& config, const IoPaths& io) {
    return json{{"dataset_id", config.dataset_id},
                {"graph_mode", config.graph_mode},
                {"sampler", config.sampler},
                {"radius", config.radius},
                {"kg", config.kg},
                {"t", config.t},
                {"m", config.m},
                {"kde_k", config.kde_k},
                {"budget", config.budget},
                {"ensure_coverage", config.ensure_coverage},
                {"consensus_threshold", config.consensus_threshold},
                {"sigma", config.sigma},
                {"noise_variance", config.noise_variance},
                {"seed", config.seed},
                {"input", io.input},
                {"gt", io.gt}};
}

void config_from_json(const json& j, srland::RunConfig& config, IoPaths& io) {
    config.dataset_id = j.at("dataset_id").get<std::string>();
    config.graph_mode = j.at("graph_mode").get<std::string>();
    config.sampler = j.at("sampler").get<std::string>();
    config.radius = j.at("radius").get<double>();
    config.kg = j.at("kg").get<int>();
    config.t = j.at("t").get<std::int64_t>();
    config.m = j.at("m").get<int>();
    config.kde_k = j.at("kde_k").get<int>();
    config.budget = j.at("budget").get<std::int64_t>();
    config.ensure_coverage = j.at("ensure_coverage").get<bool>();
    config.consensus_threshold = j.at("consensus_threshold").get<double>();
    config.sigma = j.at("sigma").get<double>();
    config.noise_variance = j.at("noise_variance").get<double>();
    config.seed = j.at("seed").get<std::uint64_t>();
    io.input = j.at("input").get<std::string>();
    io.gt = j.at("gt").get<std::string>();
}

json record_to_json(const srland::RunRecord& r) {
    return json{{"dataset_id", r.dataset_id},
                {"variant", r.variant},
                {"radius", r.radius},
                {"kg", r.kg},
                {"t", r.t},
                {"m", r.m},
                {"kde_k", r.kde_k},
                {"budget_requested", r.budget_requested},
                {"budget_used", r.budget_used},
                {"seed", r.seed},
                {"oa", r.oa},
                {"aa", r.aa},
                {"kappa", r.kappa},
                {"seconds", r.seconds},
                {"coverage_warning", r.coverage_warning},
                {"sigma_used", r.sigma_used},
                {"n", r.n},
                {"bands", r.bands},
                {"stage1_deferrals", r.stage1_deferrals},
                {"fdp_fallbacks", r.fdp_fallbacks},
                {"modes_ranked", r.modes_ranked}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw srland::io_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw srland::io_error("short write: " + path);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw srland::io_error("cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw srland::io_error("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw srland::io_error("cannot create output directory " + dir + ": " + ec.message());
}

int cmd_synth(std::int64_t rows, std::int64_t cols, std::int64_t bands, std::int64_t classes,
              double separation, int smoothness, std::uint64_t seed, const std::string& out_dir) {
    ensure_dir(out_dir);
    srland::SyntheticScene scene =
        srland::synthesize_scene(rows, cols, bands, classes, separation, smoothness, seed);
    std::string cube_path = (fs::path(out_dir) / "cube.npy").string();
    std::string gt_path = (fs::path(out_dir) / "gt.npy").string();
    srland::save_npy_cube(scene.cube, cube_path);
    srland::save_npy_labels(scene.truth.rows, scene.truth.cols, scene.truth.labels, gt_path);
    json manifest{{"format", "srland-manifest"},
                  {"version", 1},
                  {"command", "synth"},
                  {"rows", rows},
                  {"cols", cols},
                  {"bands", bands},
                  {"classes", classes},
                  {"separation", separation},
                  {"smoothness", smoothness},
                  {"seed", seed},
                  {"outputs", {{"cube", cube_path}, {"gt", gt_path}}}};
    write_text((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << manifest["outputs"].dump() << "\n";
    return 0;
}

int cmd_run(srland::RunConfig config, IoPaths io, const std::string& manifest_in,
            bool dump_arrays) {
    if (!manifest_in.empty()) {
        json j = load_json(manifest_in);
        if (!j.contains("config")) throw srland::io_error("manifest lacks a config block");
        config_from_json(j.at("config"), config, io);
    } else {
        config.dataset_id = dataset_id(io);
    }
    if (io.input.empty() || io.gt.empty()) {
        throw srland::usage_error("run needs --input and --gt (or --manifest)");
    }
    ensure_dir(io.output_dir);

    srland::ImageCube cube = srland::load_npy_cube(io.input);
    srland::GroundTruth truth = srland::load_npy_labels(io.gt);
    srland::PipelineResult result = srland::run_pipeline(cube, truth, config);

    fs::path dir(io.output_dir);
    std::string labels_npy = (dir / "labels.npy").string();
    std::string labels_ppm = (dir / "labels.ppm").string();
    std::string labels_csv = (dir / "labels.csv").string();
    std::string queries_csv = (dir / "queries.csv").string();
    srland::save_npy_labels(truth.rows, truth.cols, result.map.labels, labels_npy);
    srland::write_ppm(labels_ppm, result.map.labels, truth.grid());
    srland::write_label_csv(labels_csv, result.map, truth.grid());
    srland::write_query_csv(queries_csv, result.query_log, truth.grid());

    json outputs{{"labels_npy", labels_npy},
                 {"labels_ppm", labels_ppm},
                 {"labels_csv", labels_csv},
                 {"queries_csv", queries_csv}};
    if (dump_arrays) {
        std::string eig = (dir / "eigenvalues.npy").string();
        std::string psi = (dir / "psi.npy").string();
        std::string density = (dir / "density.npy").string();
        std::string rho = (dir / "rho.npy").string();
        std::string score = (dir / "score.npy").string();
        srland::save_npy(eig, {static_cast<std::int64_t>(result.eigenvalues.size())},
                         result.eigenvalues.data());
        srland::save_npy(psi, {result.psi.rows, result.psi.cols}, result.psi.data.data());
        srland::save_npy(density, {static_cast<std::int64_t>(result.density.size())},
                         result.density.data());
        srland::save_npy(rho, {static_cast<std::int64_t>(result.rho.size())}, result.rho.data());
        srland::save_npy(score, {static_cast<std::int64_t>(result.score.size())},
                         result.score.data());
        outputs["eigenvalues_npy"] = eig;
        outputs["psi_npy"] = psi;
        outputs["density_npy"] = density;
        outputs["rho_npy"] = rho;
        outputs["score_npy"] = score;
    }

    json manifest{{"format", "srland-manifest"},
                  {"version", 1},
                  {"command", "run"},
                  {"config", config_to_json(config, io)},
                  {"record", record_to_json(result.record)},
                  {"outputs", outputs}};
    write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");

    std::cout << record_to_json(result.record).dump() << "\n";
    if (result.record.coverage_warning) {
        std::cerr << "coverage warning: mode ranking exhausted before every class was labeled"
                  << " (budget used " << result.record.budget_used << ")\n";
    }
    return 0;
}

int cmd_curve(srland::RunConfig config, IoPaths io, const std::vector<std::int64_t>& budgets,
              int trials) {
    config.dataset_id = dataset_id(io);
    ensure_dir(io.output_dir);
    srland::ImageCube cube = srland::load_npy_cube(io.input);
    srland::GroundTruth truth = srland::load_npy_labels(io.gt);
    auto points = srland::learning_curve(cube, truth, config, budgets, trials);

    std::string csv = "budget,trials,mean_oa,mean_aa,mean_kappa,mean_seconds\n";
    for (const auto& p : points) {
        csv += std::to_string(p.budget) + "," + std::to_string(p.trials) + "," +
               csv_number(p.mean_oa) + "," + csv_number(p.mean_aa) + "," +
               csv_number(p.mean_kappa) + "," + csv_number(p.mean_seconds) + "\n";
    }
    fs::path dir(io.output_dir);
    std::string csv_path = (dir / "curve.csv").string();
    write_text(csv_path, csv);
    json manifest{{"format", "srland-manifest"},
                  {"version", 1},
                  {"command", "curve"},
                  {"config", config_to_json(config, io)},
                  {"budgets", budgets},
                  {"trials", trials},
                  {"outputs", {{"curve_csv", csv_path}}}};
    write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << csv;
    return 0;
}

int cmd_sweep(srland::RunConfig config, IoPaths io, const std::vector<double>& radii,
              int trials) {
    config.dataset_id = dataset_id(io);
    ensure_dir(io.output_dir);
    srland::ImageCube cube = srland::load_npy_cube(io.input);
    srland::GroundTruth truth = srland::load_npy_labels(io.gt);
    auto points = srland::radius_sweep(cube, truth, config, radii, trials);

    std::string csv = "radius,trials,mean_oa,mean_aa,mean_kappa,mean_seconds\n";
    for (const auto& p : points) {
        csv += csv_number(p.radius) + "," + std::to_string(p.trials) + "," +
               csv_number(p.mean_oa) + "," + csv_number(p.mean_aa) + "," +
               csv_number(p.mean_kappa) + "," + csv_number(p.mean_seconds) + "\n";
    }
    fs::path dir(io.output_dir);
    std::string csv_path = (dir / "sweep.csv").string();
    write_text(csv_path, csv);
    json manifest{{"format", "srland-manifest"},
                  {"version", 1},
                  {"command", "sweep"},
                  {"config", config_to_json(config, io)},
                  {"radii", radii},
                  {"trials", trials},
                  {"outputs", {{"sweep_csv", csv_path}}}};
    write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << csv;
    return 0;
}

int cmd_bench(srland::RunConfig config, const std::string& out_dir,
              const std::vector<std::int64_t>& sizes, const srland::SceneConfig& scene) {
    ensure_dir(out_dir);
    auto points = srland::scaling_benchmark(sizes, config, scene);
    std::string csv = "n,rows,cols,seconds,oa\n";
    for (const auto& p : points) {
        csv += std::to_string(p.n) + "," + std::to_string(p.rows) + "," + std::to_string(p.cols) +
               "," + csv_number(p.seconds) + "," + csv_number(p.oa) + "\n";
    }
    fs::path dir(out_dir);
    std::string csv_path = (dir / "bench.csv").string();
    write_text(csv_path, csv);
    json manifest{{"format", "srland-manifest"},
                  {"version", 1},
                  {"command", "bench"},
                  {"config", config_to_json(config, IoPaths{})},
                  {"sizes", sizes},
                  {"scene",
                   {{"bands", scene.bands},
                    {"classes", scene.classes},
                    {"separation", scene.separation},
                    {"smoothness", scene.smoothness}}},
                  {"outputs", {{"bench_csv", csv_path}}}};
    write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << csv;
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& out_path) {
    srland::GroundTruth pred = srland::load_npy_labels(pred_path);
    srland::GroundTruth truth = srland::load_npy_labels(gt_path);
    if (pred.rows != truth.rows || pred.cols != truth.cols) {
        throw srland::usage_error("prediction and ground truth shapes differ");
    }
    json metrics{{"oa", srland::overall_accuracy(pred.labels, truth)},
                 {"aa", srland::average_accuracy(pred.labels, truth)},
                 {"kappa", srland::cohens_kappa(pred.labels, truth)},
                 {"labeled_pixels", truth.labeled_count()}};
    std::string line = metrics.dump() + "\n";
    if (!out_path.empty()) write_text(out_path, line);
    std::cout << line;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatially regularized diffusion-geometry active learning for images"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic scene");
    std::int64_t rows = 16, cols = 16, bands = 4, classes = 2;
    double separation = 10.0;
    int smoothness = 1;
    std::uint64_t synth_seed = 1;
    std::string synth_out = ".";
    synth->add_option("--rows", rows, "grid rows");
    synth->add_option("--cols", cols, "grid cols");
    synth->add_option("--bands", bands, "spectral bands");
    synth->add_option("--classes", classes, "class count (>= 2)");
    synth->add_option("--separation", separation, "class-mean separation");
    synth->add_option("--smoothness", smoothness, "region seeds per class");
    synth->add_option("--seed", synth_seed, "scene seed");
    synth->add_option("--output-dir", synth_out, "where cube.npy / gt.npy go");

    // shared run-style state
    srland::RunConfig config;
    IoPaths io;
    std::string manifest_in;
    bool dump_arrays = false;

    auto* run = app.add_subcommand("run", "run the full pipeline once");
    run->add_option("--input", io.input, "image cube NPY");
    run->add_option("--gt", io.gt, "ground truth NPY");
    run->add_option("--output-dir", io.output_dir, "output directory");
    run->add_option("--dataset", io.dataset, "dataset id override (affects radius preset)");
    run->add_option("--manifest", manifest_in, "replay the config block of a stored manifest");
    run->add_flag("--dump-arrays", dump_arrays,
                  "also write eigenvalues/psi/density/rho/score NPY files");
    add_config_flags(run, config);

    auto* curve = app.add_subcommand("curve", "accuracy vs. label budget");
    std::vector<std::int64_t> budgets;
    int trials = 10;
    curve->add_option("--input", io.input, "image cube NPY")->required();
    curve->add_option("--gt", io.gt, "ground truth NPY")->required();
    curve->add_option("--output-dir", io.output_dir, "output directory");
    curve->add_option("--dataset", io.dataset, "dataset id override");
    curve->add_option("--budgets", budgets, "budgets, comma separated")
        ->required()
        ->delimiter(',');
    curve->add_option("--trials", trials, "independent trials per budget");
    add_config_flags(curve, config);

    auto* sweep = app.add_subcommand("sweep", "spatial-core accuracy vs. radius");
    std::vector<double> radii;
    sweep->add_option("--input", io.input, "image cube NPY")->required();
    sweep->add_option("--gt", io.gt, "ground truth NPY")->required();
    sweep->add_option("--output-dir", io.output_dir, "output directory");
    sweep->add_option("--dataset", io.dataset, "dataset id override");
    sweep->add_option("--radii", radii, "radii, comma separated")->required()->delimiter(',');
    sweep->add_option("--trials", trials, "independent trials per radius");
    add_config_flags(sweep, config);

    auto* bench = app.add_subcommand("bench", "full-pipeline wall time vs. scene size");
    std::vector<std::int64_t> sizes;
    srland::SceneConfig scene;
    std::string bench_out = ".";
    bench->add_option("--sizes", sizes, "point counts, comma separated")->required()->delimiter(',');
    bench->add_option("--output-dir", bench_out, "output directory");
    bench->add_option("--scene-bands", scene.bands, "scene spectral bands");
    bench->add_option("--scene-classes", scene.classes, "scene class count");
    bench->add_option("--scene-separation", scene.separation, "scene class separation");
    bench->add_option("--scene-smoothness", scene.smoothness, "scene seeds per class");
    add_config_flags(bench, config);

    auto* eval = app.add_subcommand("eval", "score a stored label map against ground truth");
    std::string pred_path, eval_gt, eval_out;
    eval->add_option("--pred", pred_path, "predicted labels NPY")->required();
    eval->add_option("--gt", eval_gt, "ground truth NPY")->required();
    eval->add_option("--output", eval_out, "also write the metrics JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (app.got_subcommand(synth)) {
            return cmd_synth(rows, cols, bands, classes, separation, smoothness, synth_seed,
                             synth_out);
        }
        if (app.got_subcommand(run)) return cmd_run(config, io, manifest_in, dump_arrays);
        if (app.got_subcommand(curve)) return cmd_curve(config, io, budgets, trials);
        if (app.got_subcommand(sweep)) return cmd_sweep(config, io, radii, trials);
        if (app.got_subcommand(bench)) return cmd_bench(config, bench_out, sizes, scene);
        if (app.got_subcommand(eval)) return cmd_eval(pred_path, eval_gt, eval_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return srland::exit_code_for(e);
    }
    return 0;
}
