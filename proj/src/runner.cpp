#include "goal/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace goal {

namespace {

std::vector<StageData> build_stream(const RunConfig& cfg, std::uint64_t seed) {
    if (!cfg.embeddings_path.empty()) return load_embeddings(cfg.embeddings_path);
    StreamSpec spec = cfg.stream;
    spec.seed = cfg.stream.seed + seed;
    return generate_stream(spec);
}

void mean_over_incremental(const ProtocolResult& r, double& all, double& old_acc, double& new_acc) {
    double sa = 0.0, so = 0.0, sn = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 1; t < r.stages.size(); ++t) {
        sa += r.stages[t].acc.all;
        so += r.stages[t].acc.old_acc;
        sn += r.stages[t].acc.new_acc;
        ++n;
    }
    all = n ? sa / n : 0.0;
    old_acc = n ? so / n : 0.0;
    new_acc = n ? sn / n : 0.0;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

ProtocolResult run_single(const RunConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto stream = build_stream(cfg, seed);
    const std::size_t input_dim =
        stream.empty() ? cfg.stream.input_dim : stream.front().train_inputs.cols;

    const EtfFrame frame = EtfFrame::build(cfg.frame_d, cfg.resolved_frame_k(), cfg.frame_seed);

    std::vector<std::size_t> dims = cfg.encoder_dims();
    dims.front() = input_dim;
    Rng enc_rng = Rng(seed).split(42);
    const Encoder encoder(dims, enc_rng);

    return run_protocol(stream, frame, encoder, cfg.session, seed);
}

void run_and_write(const RunConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    const auto t0 = std::chrono::steady_clock::now();
    const ProtocolResult result = run_single(cfg, cfg.seed);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    {
        std::ofstream out(fs::path(out_dir) / "stages.csv");
        out << "t,acc_all,acc_old,acc_new\n";
        for (const auto& s : result.stages)
            out << s.t << ',' << fmt(s.acc.all) << ',' << fmt(s.acc.old_acc) << ','
                << fmt(s.acc.new_acc) << '\n';
    }
    {
        std::ofstream out(fs::path(out_dir) / "nc_trace.csv");
        out << "t,checkpoint,nc1,nc2,nc3,nc4\n";
        for (const auto& s : result.stages) {
            if (s.t == 0) {
                for (std::size_t c = 0; c < s.nc_trace.size(); ++c) {
                    const auto& d = s.nc_trace[c];
                    out << s.t << ',' << c << ',' << fmt(d.nc1) << ',' << fmt(d.nc2) << ','
                        << fmt(d.nc3) << ',' << fmt(d.nc4) << '\n';
                }
            } else if (s.nc) {
                out << s.t << ",0," << fmt(s.nc->nc1) << ',' << fmt(s.nc->nc2) << ','
                    << fmt(s.nc->nc3) << ',' << fmt(s.nc->nc4) << '\n';
            }
        }
    }
    {
        nlohmann::ordered_json j;
        j["seed"] = cfg.seed;
        j["preset"] = cfg.preset;
        if (result.m_f)
            j["M_f"] = *result.m_f;
        else
            j["M_f"] = nullptr;
        if (result.m_d)
            j["M_d"] = *result.m_d;
        else
            j["M_d"] = nullptr;
        j["stage0_all"] = result.stages.front().acc.all;
        nlohmann::ordered_json cfgj;
        cfgj["alpha"] = cfg.session.alpha;
        cfgj["lambda_A"] = cfg.session.loss.lambda_a;
        cfgj["lambda_rep"] = cfg.session.loss.lambda_rep;
        cfgj["tau"] = cfg.session.loss.tau;
        cfgj["epsilon"] = cfg.session.loss.epsilon;
        cfgj["teacher_temp"] = cfg.session.loss.teacher_temp;
        cfgj["learning_rate"] = cfg.session.sgd.learning_rate;
        cfgj["momentum"] = cfg.session.sgd.momentum;
        cfgj["batch_size"] = cfg.session.sgd.batch_size;
        cfgj["base_epochs"] = cfg.session.base_epochs;
        cfgj["incremental_epochs"] = cfg.session.incremental_epochs;
        cfgj["sup_etf_align"] = cfg.session.sup_etf_align;
        cfgj["unsup_etf_align"] = cfg.session.unsup_etf_align;
        cfgj["frame_d"] = cfg.frame_d;
        cfgj["frame_K"] = cfg.resolved_frame_k();
        cfgj["frame_seed"] = cfg.frame_seed;
        cfgj["stream_seed"] = cfg.stream.seed;
        j["config"] = cfgj;
        j["wall_time_s"] = wall;
        std::ofstream out(fs::path(out_dir) / "summary.json");
        out << j.dump(2) << '\n';
    }
}

std::vector<AblationCell> run_ablation_grid(const RunConfig& cfg, std::size_t n_seeds) {
    std::vector<AblationCell> cells;
    for (bool sup : {false, true}) {
        for (bool unsup : {false, true}) {
            AblationCell cell;
            cell.sup = sup;
            cell.unsup = unsup;
            for (std::size_t s = 0; s < n_seeds; ++s) {
                RunConfig c = cfg;
                c.session.sup_etf_align = sup;
                c.session.unsup_etf_align = unsup;
                const ProtocolResult r = run_single(c, cfg.seed + s);
                double a, o, n;
                mean_over_incremental(r, a, o, n);
                cell.mean_all += a / n_seeds;
                cell.mean_old += o / n_seeds;
                cell.mean_new += n / n_seeds;
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

void ablate_and_write(const RunConfig& cfg, const std::string& out_dir, std::size_t n_seeds) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto cells = run_ablation_grid(cfg, n_seeds);
    std::ofstream out(fs::path(out_dir) / "ablation.csv");
    out << "sup_etf_align,unsup_etf_align,mean_all,mean_old,mean_new\n";
    for (const auto& c : cells)
        out << (c.sup ? "on" : "off") << ',' << (c.unsup ? "on" : "off") << ','
            << fmt(c.mean_all) << ',' << fmt(c.mean_old) << ',' << fmt(c.mean_new) << '\n';
}

std::vector<AlphaPoint> run_alpha_sweep(const RunConfig& cfg, const std::vector<double>& alphas,
                                        std::size_t n_seeds) {
    std::vector<AlphaPoint> points;
    for (double a : alphas) {
        if (a <= 0.0 || a > 1.0) throw ConfigError("alpha sweep: values must be in (0, 1]");
        AlphaPoint p;
        p.alpha = a;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            RunConfig c = cfg;
            c.session.alpha = a;
            const ProtocolResult r = run_single(c, cfg.seed + s);
            double al, o, n;
            mean_over_incremental(r, al, o, n);
            p.mean_all += al / n_seeds;
            p.mean_old += o / n_seeds;
            p.mean_new += n / n_seeds;
        }
        points.push_back(p);
    }
    return points;
}

void sweep_alpha_and_write(const RunConfig& cfg, const std::vector<double>& alphas,
                           const std::string& out_dir, std::size_t n_seeds) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto points = run_alpha_sweep(cfg, alphas, n_seeds);
    std::ofstream out(fs::path(out_dir) / "alpha_sweep.csv");
    out << "alpha,mean_all,mean_old,mean_new\n";
    for (const auto& p : points)
        out << fmt(p.alpha) << ',' << fmt(p.mean_all) << ',' << fmt(p.mean_old) << ','
            << fmt(p.mean_new) << '\n';
}

}  // namespace goal
