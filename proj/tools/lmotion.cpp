// lmotion: batch CLI for motion decomposition in GAN latent space.
//
// Subcommands wire the library into complete workflows: fit motion subspaces
// from single-motion trajectory files, decompose/recombine mixed motion,
// transfer motion onto a new source code, run disentanglement reports, the
// ICA baseline, and the synthetic ground-truth generator.
//
// Conventions: stdout carries exactly one machine-readable JSON summary line;
// human-readable logs go to stderr. Exit codes: 0 success, 2 usage or
// validation error, 3 numerical failure, 4 I/O failure. LM_THREADS caps the
// number of worker threads used for batch file work.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "latentmotion/latentmotion.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int worker_count(std::size_t items) {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("LM_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = static_cast<unsigned>(std::min<long>(cap, n));
    }
    return static_cast<int>(std::min<std::size_t>(n, items));
}

// Index-sharded parallel loop; worker exceptions are rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t items, Fn&& fn) {
    const int workers = worker_count(items);
    if (workers <= 1) {
        for (std::size_t i = 0; i < items; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= items) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<double> parse_reals(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            lm::fail(lm::errc::invalid_argument,
                     std::string("cannot parse ") + what + " value '" + cell + "'");
        }
    }
    lm::require(!out.empty(), lm::errc::invalid_argument, std::string(what) + " list is empty");
    return out;
}

std::vector<int> parse_ints(const std::string& csv, const char* what) {
    std::vector<int> out;
    for (double v : parse_reals(csv, what)) out.push_back(static_cast<int>(v));
    return out;
}

void emit(const json& summary) { std::cout << summary.dump() << "\n"; }

void log_line(const std::string& msg) { std::cerr << msg << "\n"; }

void write_text(const fs::path& path, const std::string& text) {
    lm::detail::ByteWriter w;
    w.blob(text);
    w.commit(path);
}

// Shared flags for commands that read trajectories through a layer range.
struct RangeOptions {
    int layer_start = 0;
    int layer_count = 10;
    lm::LayerRange range() const { return {layer_start, layer_count}; }
};

void add_range_flags(CLI::App* cmd, RangeOptions& opt) {
    cmd->add_option("--layer-start", opt.layer_start, "First edited layer")
        ->capture_default_str();
    cmd->add_option("--layer-count", opt.layer_count, "Number of edited layers (L)")
        ->capture_default_str();
}

std::vector<lm::TransitionSequence> load_transition_seqs(const std::vector<std::string>& paths,
                                                         lm::LayerRange range) {
    std::vector<lm::TransitionSequence> seqs(paths.size());
    parallel_for(paths.size(), [&](std::size_t i) {
        seqs[i] = lm::compute_transitions(lm::load_trajectory(paths[i]), range);
    });
    return seqs;
}

std::string label_or(const lm::MotionSubspace& s, std::size_t index) {
    return s.motion_label.empty() ? "motion" + std::to_string(index) : s.motion_label;
}

std::vector<double> resolve_alphas(const std::string& csv, std::size_t count, bool normalize) {
    std::vector<double> alphas(count, 1.0);
    if (!csv.empty()) {
        alphas = parse_reals(csv, "alpha");
        lm::require(alphas.size() == count, lm::errc::length_mismatch,
                    "need one alpha per subspace");
    }
    if (normalize) {
        double sum = 0.0;
        for (double a : alphas) sum += a;
        lm::require(std::abs(sum) > 1e-12, lm::errc::invalid_argument,
                    "cannot normalize alphas summing to zero");
        for (double& a : alphas) a /= sum;
    }
    return alphas;
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::vector<std::string> inputs;
    std::string output;
    std::string label = "motion";
    std::string preset;
    int k = 8;
    bool center = false;
    RangeOptions range;
    CLI::Option* k_opt = nullptr;
};

int cmd_fit(FitArgs& args) {
    if (!args.preset.empty()) {
        // face pose 35, face expression 50, car 10; all with L = 10
        const std::map<std::string, int> presets{
            {"face-pose", 35}, {"face-expression", 50}, {"car", 10}};
        const auto it = presets.find(args.preset);
        lm::require(it != presets.end(), lm::errc::invalid_argument,
                    "unknown preset '" + args.preset + "'");
        if (args.k_opt->count() == 0) args.k = it->second;
        if (args.label == "motion") args.label = args.preset;
    }

    const auto seqs = load_transition_seqs(args.inputs, args.range.range());
    const auto data = lm::accumulate(seqs, args.label);
    const auto model = lm::fit_subspace(data, args.k, args.center);
    lm::save_subspace(args.output, model);

    log_line("fitted '" + args.label + "': K=" + std::to_string(model.k()) + ", M=" +
             std::to_string(model.sample_count) + ", d_sub=" + std::to_string(model.d_sub()));
    double cumulative = 0.0;
    for (int i = 0; i < model.k(); ++i) {
        cumulative += model.explained_ratio(i);
        if (i < 10 || i == model.k() - 1)
            log_line("  component " + std::to_string(i) + ": ratio=" +
                     std::to_string(model.explained_ratio(i)) + " cumulative=" +
                     std::to_string(cumulative));
    }
    for (const auto& w : model.warnings) log_line("warning: " + w);

    emit(json{{"status", "ok"},
              {"command", "fit"},
              {"output", args.output},
              {"label", args.label},
              {"k", model.k()},
              {"samples", model.sample_count},
              {"d_sub", model.d_sub()},
              {"centered", model.centered},
              {"cumulative_explained", model.cumulative_explained()},
              {"warnings", model.warnings}});
    return 0;
}

struct DecomposeArgs {
    std::string input;
    std::vector<std::string> subspace_files;
    std::string output_prefix;
    std::string alphas_csv;
    bool normalize_alphas = false;
    bool freeze_fine = false;
};

int cmd_decompose(DecomposeArgs& args) {
    std::vector<lm::MotionSubspace> subspaces;
    for (const auto& f : args.subspace_files) subspaces.push_back(lm::load_subspace(f));
    const auto alphas =
        resolve_alphas(args.alphas_csv, subspaces.size(), args.normalize_alphas);

    json warnings = json::array();
    const double coherence = lm::max_cross_coherence(subspaces);
    if (coherence > lm::kCoherenceWarnThreshold) {
        const std::string w = "cross-subspace coherence " + std::to_string(coherence) +
                              " exceeds " + std::to_string(lm::kCoherenceWarnThreshold) +
                              "; recombination may over-count shared directions";
        log_line("warning: " + w);
        warnings.push_back(w);
    }

    const auto traj = lm::load_trajectory(args.input);
    const auto ts = lm::compute_transitions(traj, subspaces.front().layer_range);
    const auto fine = args.freeze_fine ? lm::FinePolicy::freeze : lm::FinePolicy::replay;

    std::vector<lm::TransitionSequence> projected;
    for (const auto& s : subspaces) projected.push_back(lm::project_sequence(ts, s));

    json outputs = json::array();
    for (std::size_t j = 0; j < subspaces.size(); ++j) {
        const fs::path out = args.output_prefix + "." + label_or(subspaces[j], j) + ".ltrj";
        lm::save_trajectory(out, lm::integrate(projected[j], fine));
        outputs.push_back(out.string());
    }

    const auto recombined = lm::combine(projected, alphas);
    const fs::path recombined_path = args.output_prefix + ".recombined.ltrj";
    lm::save_trajectory(recombined_path, lm::integrate(recombined, fine));
    outputs.push_back(recombined_path.string());

    // per-frame energy split: how much of each transition lives in each subspace
    std::ostringstream csv;
    csv << "frame,total_sq";
    for (std::size_t j = 0; j < subspaces.size(); ++j) csv << ',' << label_or(subspaces[j], j);
    csv << "\n";
    for (int t = 0; t < ts.transition_count(); ++t) {
        const double total = ts.transitions.row(t).squaredNorm();
        csv << t << ',' << total;
        for (const auto& p : projected)
            csv << ',' << (total > 0.0 ? p.transitions.row(t).squaredNorm() / total : 0.0);
        csv << "\n";
    }
    const fs::path energy_path = args.output_prefix + ".energy.csv";
    write_text(energy_path, csv.str());
    outputs.push_back(energy_path.string());

    emit(json{{"status", "ok"},
              {"command", "decompose"},
              {"input", args.input},
              {"subspaces", args.subspace_files.size()},
              {"alphas", alphas},
              {"coherence", coherence},
              {"outputs", outputs},
              {"warnings", warnings}});
    return 0;
}

struct TransferArgs {
    std::string source;
    std::string driving;
    std::vector<std::string> subspace_files;
    std::string output;
    std::string alphas_csv;
    bool normalize_alphas = false;
};

int cmd_transfer(TransferArgs& args) {
    std::vector<lm::MotionSubspace> subspaces;
    for (const auto& f : args.subspace_files) subspaces.push_back(lm::load_subspace(f));
    const auto alphas =
        resolve_alphas(args.alphas_csv, subspaces.size(), args.normalize_alphas);

    const auto source_traj = lm::load_trajectory(args.source);
    const auto driving_traj = lm::load_trajectory(args.driving);
    const auto result = lm::transfer(source_traj.frames.front(), driving_traj, subspaces, alphas);
    lm::save_trajectory(args.output, result);

    emit(json{{"status", "ok"},
              {"command", "transfer"},
              {"source", args.source},
              {"driving", args.driving},
              {"alphas", alphas},
              {"frames", result.frame_count()},
              {"output", args.output}});
    return 0;
}

struct OrthoArgs {
    std::string model_a;
    std::string model_b;
    std::string output_prefix;
    int top_k = 20;
};

int cmd_ortho(OrthoArgs& args) {
    const auto a = lm::load_subspace(args.model_a);
    const auto b = lm::load_subspace(args.model_b);
    const auto rep = lm::orthogonality_report(a, b, args.top_k);
    for (const auto& w : rep.warnings) log_line("warning: " + w);

    std::ostringstream dots;
    for (int i = 0; i < rep.dot_matrix.rows(); ++i) {
        for (int j = 0; j < rep.dot_matrix.cols(); ++j)
            dots << (j ? "," : "") << rep.dot_matrix(i, j);
        dots << "\n";
    }
    write_text(args.output_prefix + ".dots.csv", dots.str());

    std::ostringstream hist;
    hist << "bin_low,bin_high,count\n";
    for (int i = 0; i < lm::OrthogonalityReport::kHistogramBins; ++i)
        hist << i * rep.histogram_bin_width() << ',' << (i + 1) * rep.histogram_bin_width()
             << ',' << rep.histogram[i] << "\n";
    write_text(args.output_prefix + ".hist.csv", hist.str());

    std::ostringstream angles;
    angles << "index,radians,degrees\n";
    for (int i = 0; i < rep.principal_angles.size(); ++i)
        angles << i << ',' << rep.principal_angles[i] << ','
               << rep.principal_angles[i] * 180.0 / 3.14159265358979323846 << "\n";
    write_text(args.output_prefix + ".angles.csv", angles.str());

    std::int64_t below = 0;
    const std::int64_t total = std::int64_t(rep.top_k) * rep.top_k;
    for (int i = 0; i < rep.dot_matrix.rows(); ++i)
        for (int j = 0; j < rep.dot_matrix.cols(); ++j)
            if (std::abs(rep.dot_matrix(i, j)) < 0.05) ++below;

    emit(json{{"status", "ok"},
              {"command", "ortho"},
              {"top_k", rep.top_k},
              {"clamped", rep.top_k_clamped},
              {"max_abs_dot", rep.dot_matrix.cwiseAbs().maxCoeff()},
              {"frac_abs_dot_below_0.05", total ? double(below) / double(total) : 0.0},
              {"min_principal_angle", rep.principal_angles.minCoeff()},
              {"max_principal_angle", rep.principal_angles.maxCoeff()},
              {"outputs",
               {args.output_prefix + ".dots.csv", args.output_prefix + ".hist.csv",
                args.output_prefix + ".angles.csv"}},
              {"warnings", rep.warnings}});
    return 0;
}

struct VarianceArgs {
    std::vector<std::string> inputs;
    std::string output_prefix;
    std::string label = "motion";
    int max_k = 0;  // 0: full rank
    bool center = false;
    RangeOptions range;
};

int cmd_variance(VarianceArgs& args) {
    const auto seqs = load_transition_seqs(args.inputs, args.range.range());
    const auto data = lm::accumulate(seqs, args.label);
    const int full_rank = std::min(data.sample_count(), data.d_sub());
    const int max_k = args.max_k > 0 ? args.max_k : full_rank;
    const auto rep = lm::variance_report(data, max_k, args.center);

    std::ostringstream csv;
    csv << "component,ratio,cumulative\n";
    for (int i = 0; i < max_k; ++i)
        csv << i << ',' << rep.per_component_ratio[i] << ',' << rep.cumulative_ratio[i] << "\n";
    const fs::path out = args.output_prefix + ".variance.csv";
    write_text(out, csv.str());

    json thresholds = json::object();
    for (const auto& [t, k] : rep.k_at_thresholds)
        thresholds[std::to_string(t)] = k;  // 0: not reached within max_k

    emit(json{{"status", "ok"},
              {"command", "variance"},
              {"samples", data.sample_count()},
              {"max_k", max_k},
              {"full_rank", rep.full_rank},
              {"centered", rep.centered},
              {"cumulative_at_max_k", rep.cumulative_ratio[max_k - 1]},
              {"k_at_thresholds", thresholds},
              {"output", out.string()}});
    return 0;
}

struct ApmArgs {
    std::string input;
    int stride = 10;
};

int cmd_apm(ApmArgs& args) {
    auto track = lm::load_landmarks_any(args.input);
    track.stride = args.stride;
    const double value = lm::apm(track);
    log_line("APM = " + std::to_string(value));
    emit(json{{"status", "ok"},
              {"command", "apm"},
              {"apm", value},
              {"frames", track.frame_count()},
              {"points", track.point_count()},
              {"spatial_dims", track.spatial_dims()},
              {"stride", args.stride}});
    return 0;
}

struct IcaArgs {
    std::vector<std::string> inputs;
    std::string output_prefix;
    int components = 6;
    int max_iter = 1000;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    std::string contrast = "logcosh";
    std::string export_dir;
    std::string apply_input;
    std::string apply_output;
    std::string select_csv;
    std::string annotation_file;
    std::string motion;
    RangeOptions range;
};

// Annotation file: one "component_index,label" line per component.
std::map<int, std::string> read_annotations(const fs::path& path) {
    std::ifstream in(path);
    lm::require(in.good(), lm::errc::io_failure, "cannot open " + path.string());
    std::map<int, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        lm::require(comma != std::string::npos, lm::errc::invalid_argument,
                    "annotation line missing comma: '" + line + "'");
        try {
            out[std::stoi(line.substr(0, comma))] = line.substr(comma + 1);
        } catch (const std::exception&) {
            lm::fail(lm::errc::invalid_argument, "bad annotation line: '" + line + "'");
        }
    }
    return out;
}

int cmd_ica(IcaArgs& args) {
    const auto seqs = load_transition_seqs(args.inputs, args.range.range());
    const auto data = lm::accumulate(seqs, "entangled");

    lm::IcaOptions opts;
    opts.max_iter = args.max_iter;
    opts.tol = args.tol;
    opts.seed = args.seed;
    lm::require(args.contrast == "logcosh" || args.contrast == "exp", lm::errc::invalid_argument,
                "contrast must be 'logcosh' or 'exp'");
    opts.contrast = args.contrast == "exp" ? lm::IcaContrast::exp : lm::IcaContrast::logcosh;

    const auto model = lm::fit_ica(data, args.components, opts);
    for (const auto& w : model.warnings) log_line("warning: " + w);

    // per-component source statistics over the training data
    const Eigen::MatrixXd centered = data.samples.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd sources = centered * model.unmixing.transpose();
    std::ostringstream csv;
    csv << "component,source_std,excess_kurtosis\n";
    for (int i = 0; i < model.n_components; ++i) {
        const Eigen::ArrayXd s = sources.col(i).array();
        const double var = s.square().mean();
        const double kurt = var > 0.0 ? s.pow(4).mean() / (var * var) - 3.0 : 0.0;
        csv << i << ',' << std::sqrt(var) << ',' << kurt << "\n";
    }
    const fs::path stats_path = args.output_prefix + ".components.csv";
    write_text(stats_path, csv.str());
    json outputs = json::array({stats_path.string()});

    // perturbation export: one short trajectory per component, sweeping the
    // source from -3 to +3 standard deviations around the first input's w_0,
    // for visual annotation with an external decoder
    if (!args.export_dir.empty()) {
        fs::create_directories(args.export_dir);
        const auto base = lm::load_trajectory(args.inputs.front());
        const lm::LayerRange range = args.range.range();
        const int frames = 9;
        for (int comp = 0; comp < model.n_components; ++comp) {
            lm::LatentTrajectory sweep;
            for (int t = 0; t < frames; ++t) {
                const double amp = -3.0 + 6.0 * t / (frames - 1);
                lm::Code code = base.frames.front();
                Eigen::Map<Eigen::VectorXd> slice(
                    code.data() + std::ptrdiff_t(range.start) * code.cols(),
                    Eigen::Index(range.count) * code.cols());
                slice += amp * model.mixing_estimate.col(comp);
                sweep.frames.push_back(std::move(code));
            }
            sweep.source_id = "ica-component-" + std::to_string(comp);
            const fs::path out =
                fs::path(args.export_dir) / ("component_" + std::to_string(comp) + ".ltrj");
            lm::save_trajectory(out, sweep);
            outputs.push_back(out.string());
        }
    }

    // selective reconstruction of a trajectory from chosen sources
    if (!args.apply_input.empty()) {
        lm::require(!args.apply_output.empty(), lm::errc::invalid_argument,
                    "--apply requires --apply-output");
        std::vector<int> selected;
        if (!args.select_csv.empty()) {
            selected = parse_ints(args.select_csv, "component index");
        } else {
            lm::require(!args.annotation_file.empty() && !args.motion.empty(),
                        lm::errc::invalid_argument,
                        "selection needs --select or --annotation plus --motion");
            for (const auto& [idx, label] : read_annotations(args.annotation_file))
                if (label == args.motion) selected.push_back(idx);
            lm::require(!selected.empty(), lm::errc::invalid_argument,
                        "no components annotated as '" + args.motion + "'");
        }
        const auto traj = lm::load_trajectory(args.apply_input);
        const auto ts = lm::compute_transitions(traj, args.range.range());
        const auto filtered = lm::ica_project(ts, model, selected);
        lm::save_trajectory(args.apply_output, lm::integrate(filtered));
        outputs.push_back(args.apply_output);
    }

    emit(json{{"status", "ok"},
              {"command", "ica"},
              {"components", model.n_components},
              {"converged", model.converged},
              {"iterations", model.iterations},
              {"samples", data.sample_count()},
              {"outputs", outputs},
              {"warnings", model.warnings}});
    return 0;
}

struct SynthArgs {
    std::string out_dir;
    int d_sub = 64;
    std::string dims_csv = "8,8";
    int n_trajectories = 10;
    int frames = 20;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string weights_csv;
    bool heavy_tailed = false;
    int layout_dim = 0;
    int extra_layers = 0;
    bool no_ground_truth = false;
};

int cmd_synth(SynthArgs& args) {
    lm::SynthSpec spec;
    spec.d_sub = args.d_sub;
    for (int d : parse_ints(args.dims_csv, "subspace dim")) spec.subspace_dims.push_back(d);
    spec.n_trajectories = args.n_trajectories;
    spec.frames = args.frames;
    spec.noise_sigma = args.noise;
    spec.seed = args.seed;
    spec.heavy_tailed = args.heavy_tailed;
    spec.dim = args.layout_dim;
    spec.extra_layers = args.extra_layers;
    spec.validate();

    std::vector<double> weights(spec.subspace_dims.size(), 1.0);
    if (!args.weights_csv.empty()) {
        weights = parse_reals(args.weights_csv, "weight");
        lm::require(weights.size() == spec.subspace_dims.size(), lm::errc::length_mismatch,
                    "need one weight per subspace");
    }

    fs::create_directories(args.out_dir);
    const auto bases = make_orthogonal_bases(spec);
    const auto set = sample_trajectories(spec, bases, weights);

    json outputs = json::array();
    for (std::size_t j = 0; j < bases.size(); ++j) {
        const fs::path out = fs::path(args.out_dir) / ("basis_" + std::to_string(j) + ".msub");
        lm::save_subspace(out, lm::subspace_from_basis(bases[j], spec.layer_range(),
                                                       spec.layout_dim(),
                                                       "synth" + std::to_string(j)));
        outputs.push_back(out.string());
    }

    std::vector<fs::path> traj_paths(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "traj_%04zu.ltrj", i);
        traj_paths[i] = fs::path(args.out_dir) / name;
    }
    parallel_for(set.size(),
                 [&](std::size_t i) { lm::save_trajectory(traj_paths[i], set[i].trajectory); });
    for (const auto& p : traj_paths) outputs.push_back(p.string());

    if (!args.no_ground_truth) {
        json gt;
        gt["d_sub"] = spec.d_sub;
        gt["subspace_dims"] = spec.subspace_dims;
        gt["frames"] = spec.frames;
        gt["noise_sigma"] = spec.noise_sigma;
        gt["seed"] = spec.seed;
        gt["heavy_tailed"] = spec.heavy_tailed;
        gt["weights"] = weights;
        json per_traj = json::array();
        for (std::size_t i = 0; i < set.size(); ++i) {
            json entry;
            entry["file"] = traj_paths[i].filename().string();
            json parts = json::array();
            for (const auto& part : set[i].true_parts) {
                json rows = json::array();
                for (int t = 0; t < part.rows(); ++t) {
                    json row = json::array();
                    for (int c = 0; c < part.cols(); ++c) row.push_back(part(t, c));
                    rows.push_back(std::move(row));
                }
                parts.push_back(std::move(rows));
            }
            entry["true_parts"] = std::move(parts);
            per_traj.push_back(std::move(entry));
        }
        gt["trajectories"] = std::move(per_traj);
        const fs::path gt_path = fs::path(args.out_dir) / "ground_truth.json";
        write_text(gt_path, gt.dump());
        outputs.push_back(gt_path.string());
    }

    emit(json{{"status", "ok"},
              {"command", "synth"},
              {"out_dir", args.out_dir},
              {"trajectories", set.size()},
              {"subspaces", bases.size()},
              {"seed", spec.seed},
              {"outputs", outputs}});
    return 0;
}

struct ConvertArgs {
    std::string input;
    std::string output;
    std::string shape_csv;
    bool float64 = false;
};

int cmd_convert(ConvertArgs& args) {
    const fs::path in(args.input), out(args.output);
    if (!args.shape_csv.empty()) {
        const auto shape = parse_ints(args.shape_csv, "shape");
        lm::require(shape.size() == 3, lm::errc::invalid_argument, "--shape must be T,layers,dim");
        const auto traj = lm::load_raw_trajectory(in, shape[0], shape[1], shape[2], args.float64);
        lm::save_trajectory(out, traj);
    } else {
        // landmark conversion, direction chosen by the output extension
        const auto track = lm::load_landmarks_any(in);
        if (out.extension() == ".csv")
            lm::save_landmarks_csv(out, track);
        else
            lm::save_landmarks(out, track);
    }
    emit(json{{"status", "ok"},
              {"command", "convert"},
              {"input", args.input},
              {"output", args.output}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"motion decomposition for latent-code video trajectories"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; sections per subcommand");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit a motion subspace from single-motion trajectories");
    fit->add_option("inputs", fit_args.inputs, "trajectory files (.ltrj)")
        ->required()
        ->check(CLI::ExistingFile);
    fit->add_option("-o,--output", fit_args.output, "output model file (.msub)")->required();
    fit->add_option("--label", fit_args.label, "motion label")->capture_default_str();
    fit_args.k_opt = fit->add_option("-k,--k", fit_args.k, "number of principal components")
                         ->capture_default_str();
    fit->add_option("--preset", fit_args.preset,
                    "domain defaults: face-pose (k=35), face-expression (k=50), car (k=10)");
    fit->add_flag("--center", fit_args.center, "subtract the mean before PCA");
    add_range_flags(fit, fit_args.range);

    DecomposeArgs dec_args;
    auto* dec =
        app.add_subcommand("decompose", "split a trajectory into per-motion parts and recombine");
    dec->add_option("-i,--input", dec_args.input, "input trajectory")
        ->required()
        ->check(CLI::ExistingFile);
    dec->add_option("-s,--subspace", dec_args.subspace_files, "subspace model files")
        ->required()
        ->check(CLI::ExistingFile);
    dec->add_option("-o,--output-prefix", dec_args.output_prefix, "output path prefix")
        ->required();
    dec->add_option("--alphas", dec_args.alphas_csv, "per-motion strengths (default all 1)");
    dec->add_flag("--normalize-alphas", dec_args.normalize_alphas, "divide alphas by their sum");
    dec->add_flag("--freeze-fine", dec_args.freeze_fine,
                  "hold layers outside the range at w_0 instead of replaying them");

    TransferArgs tr_args;
    auto* tr = app.add_subcommand("transfer", "transfer driving motion onto a source code");
    tr->add_option("--source", tr_args.source, "source trajectory (frame 0 is w_src)")
        ->required()
        ->check(CLI::ExistingFile);
    tr->add_option("--driving", tr_args.driving, "driving trajectory")
        ->required()
        ->check(CLI::ExistingFile);
    tr->add_option("-s,--subspace", tr_args.subspace_files, "subspace model files")
        ->required()
        ->check(CLI::ExistingFile);
    tr->add_option("-o,--output", tr_args.output, "output trajectory")->required();
    tr->add_option("--alphas", tr_args.alphas_csv, "per-motion strengths (default all 1)");
    tr->add_flag("--normalize-alphas", tr_args.normalize_alphas, "divide alphas by their sum");

    OrthoArgs ortho_args;
    auto* ortho = app.add_subcommand("ortho", "orthogonality report between two subspaces");
    ortho->add_option("-a,--model-a", ortho_args.model_a, "first model")
        ->required()
        ->check(CLI::ExistingFile);
    ortho->add_option("-b,--model-b", ortho_args.model_b, "second model")
        ->required()
        ->check(CLI::ExistingFile);
    ortho->add_option("-o,--output-prefix", ortho_args.output_prefix, "report path prefix")
        ->required();
    ortho->add_option("--top-k", ortho_args.top_k, "components per side")->capture_default_str();

    VarianceArgs var_args;
    auto* var = app.add_subcommand("variance", "explained-variance curve of pooled transitions");
    var->add_option("inputs", var_args.inputs, "trajectory files")
        ->required()
        ->check(CLI::ExistingFile);
    var->add_option("-o,--output-prefix", var_args.output_prefix, "report path prefix")
        ->required();
    var->add_option("--label", var_args.label, "motion label")->capture_default_str();
    var->add_option("--max-k", var_args.max_k, "components to report (default: full rank)");
    var->add_flag("--center", var_args.center, "subtract the mean first");
    add_range_flags(var, var_args.range);

    ApmArgs apm_args;
    auto* apm_cmd = app.add_subcommand("apm", "aggregated pose motion of a landmark track");
    apm_cmd->add_option("-i,--input", apm_args.input, "landmark file (.lmrk or .csv)")
        ->required()
        ->check(CLI::ExistingFile);
    apm_cmd->add_option("--stride", apm_args.stride, "frame subsampling step")
        ->capture_default_str();

    IcaArgs ica_args;
    auto* ica = app.add_subcommand("ica", "FastICA baseline over pooled transitions");
    ica->add_option("inputs", ica_args.inputs, "trajectory files")
        ->required()
        ->check(CLI::ExistingFile);
    ica->add_option("-o,--output-prefix", ica_args.output_prefix, "report path prefix")
        ->required();
    ica->add_option("-c,--components", ica_args.components, "independent components")
        ->capture_default_str();
    ica->add_option("--max-iter", ica_args.max_iter, "iteration cap")->capture_default_str();
    ica->add_option("--tol", ica_args.tol, "convergence tolerance")->capture_default_str();
    ica->add_option("--seed", ica_args.seed, "RNG seed for the initial unmixing");
    ica->add_option("--contrast", ica_args.contrast, "logcosh or exp")->capture_default_str();
    ica->add_option("--export-components", ica_args.export_dir,
                    "write per-component perturbation trajectories here");
    ica->add_option("--apply", ica_args.apply_input, "trajectory to filter through the model")
        ->check(CLI::ExistingFile);
    ica->add_option("--apply-output", ica_args.apply_output, "filtered trajectory output");
    ica->add_option("--select", ica_args.select_csv, "source indices to keep, e.g. 0,2");
    ica->add_option("--annotation", ica_args.annotation_file,
                    "component annotation file: 'index,label' lines");
    ica->add_option("--motion", ica_args.motion, "annotation label to keep");
    add_range_flags(ica, ica_args.range);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic ground-truth dataset");
    synth->add_option("-o,--out-dir", synth_args.out_dir, "output directory")->required();
    synth->add_option("--d-sub", synth_args.d_sub, "ambient transition dimension")
        ->capture_default_str();
    synth->add_option("--dims", synth_args.dims_csv, "per-motion subspace dims, e.g. 8,8")
        ->capture_default_str();
    synth->add_option("-n,--n-trajectories", synth_args.n_trajectories,
                      "trajectories to generate")
        ->capture_default_str();
    synth->add_option("--frames", synth_args.frames, "frames per trajectory")
        ->capture_default_str();
    synth->add_option("--noise", synth_args.noise, "isotropic noise sigma")
        ->capture_default_str();
    synth->add_option("--seed", synth_args.seed, "RNG seed")->capture_default_str();
    synth->add_option("--weights", synth_args.weights_csv,
                      "per-motion mixture weights (default all 1)");
    synth->add_flag("--heavy-tailed", synth_args.heavy_tailed,
                    "Student-t(3) coefficients instead of Gaussian");
    synth->add_option("--layout-dim", synth_args.layout_dim,
                      "per-layer width of emitted codes (default: d_sub, single layer)");
    synth->add_option("--extra-layers", synth_args.extra_layers,
                      "appearance layers outside the edited range");
    synth->add_flag("--no-ground-truth", synth_args.no_ground_truth,
                    "skip the ground-truth sidecar");

    ConvertArgs conv_args;
    auto* conv = app.add_subcommand("convert", "convert raw dumps and landmark files");
    conv->add_option("-i,--input", conv_args.input, "input file")
        ->required()
        ->check(CLI::ExistingFile);
    conv->add_option("-o,--output", conv_args.output, "output file")->required();
    conv->add_option("--shape", conv_args.shape_csv,
                     "treat input as a raw row-major float dump with shape T,layers,dim");
    conv->add_flag("--float64", conv_args.float64, "raw dump holds binary64 values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help and friends
            return app.exit(e);
        }
        std::cerr << e.what() << "\n";
        emit(json{{"status", "error"},
                  {"error", "UsageError"},
                  {"class", "validation"},
                  {"message", e.what()}});
        return 2;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_args);
        if (dec->parsed()) return cmd_decompose(dec_args);
        if (tr->parsed()) return cmd_transfer(tr_args);
        if (ortho->parsed()) return cmd_ortho(ortho_args);
        if (var->parsed()) return cmd_variance(var_args);
        if (apm_cmd->parsed()) return cmd_apm(apm_args);
        if (ica->parsed()) return cmd_ica(ica_args);
        if (synth->parsed()) return cmd_synth(synth_args);
        if (conv->parsed()) return cmd_convert(conv_args);
    } catch (const lm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        const char* klass = "validation";
        int code = 2;
        switch (e.klass()) {
            case lm::error_class::numerical:
                klass = "numerical";
                code = 3;
                break;
            case lm::error_class::io:
                klass = "io";
                code = 4;
                break;
            default:
                break;
        }
        emit(json{{"status", "error"},
                  {"error", lm::to_string(e.code())},
                  {"class", klass},
                  {"message", e.what()}});
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        emit(json{{"status", "error"},
                  {"error", "Internal"},
                  {"class", "numerical"},
                  {"message", e.what()}});
        return 3;
    }
    return 0;
}
