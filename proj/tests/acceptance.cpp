// Acceptance gate: one line per criterion, PASS or FAIL with details.
// Returns the number of failed criteria.

#include <algorithm>
#include <chrono>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "goal/config.hpp"
#include "goal/discovery.hpp"
#include "goal/encoder.hpp"
#include "goal/etf.hpp"
#include "goal/eval.hpp"
#include "goal/hungarian.hpp"
#include "goal/losses.hpp"
#include "goal/numkit.hpp"
#include "goal/runner.hpp"
#include "goal/session.hpp"

using namespace goal;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int criterion, bool ok, const std::string& details) {
    std::printf("criterion %2d: %s  (%s)\n", criterion, ok ? "PASS" : "FAIL", details.c_str());
    if (!ok) ++failures;
}

std::string fmt(const char* format, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// ---------------------------------------------------------------- criterion 1

// four accumulators so the 41k-frame gram sweep vectorizes
double dot4(std::span<const double> a, std::span<const double> b) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= a.size(); i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < a.size(); ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_gram = 0.0, worst_sum = 0.0;
    for (std::size_t k = 2; k <= 64; ++k) {
        for (std::size_t d = k; d <= k + 64; ++d) {
            for (std::uint64_t seed = 0; seed < 10; ++seed) {
                const EtfFrame frame = EtfFrame::build(d, k, seed);
                // gram deviation from contiguous prototype rows, upper triangle only
                const Matrix pt = transpose(frame.prototypes());
                const double off = -1.0 / (k - 1);
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = i; j < k; ++j) {
                        const double g = dot4(pt.row(i), pt.row(j));
                        worst_gram = std::max(worst_gram, std::abs(g - (i == j ? 1.0 : off)));
                    }
                std::vector<double> rowsum(d, 0.0);
                for (std::size_t j = 0; j < k; ++j) {
                    const auto r = pt.row(j);
                    for (std::size_t i = 0; i < d; ++i) rowsum[i] += r[i];
                }
                double sum_norm = 0.0;
                for (double s : rowsum) sum_norm += s * s;
                worst_sum = std::max(worst_sum, std::sqrt(sum_norm));
            }
        }
    }
    const double secs = seconds_since(t0);
    const bool ok = worst_gram <= 1e-8 && worst_sum <= 1e-9 && secs < 10.0;
    report(1, ok,
           fmt("max gram dev %.2e <= 1e-8, max column-sum norm %.2e <= 1e-9, %.1fs < 10s",
               worst_gram, worst_sum, secs));
}

// ---------------------------------------------------------------- criterion 2

// worst central-difference relative error of a loss composed with the encoder
double encoder_grad_error(std::uint64_t seed,
                          const std::function<double(const Encoder&)>& loss_value,
                          const std::function<Encoder::Grads(const Encoder&)>& analytic_grads,
                          const Encoder& enc) {
    (void)seed;
    const Encoder::Grads grads = analytic_grads(enc);
    auto f = [&](std::span<const double> p) {
        Encoder e2 = enc;
        e2.unflatten_params(p);
        return loss_value(e2);
    };
    // h = 1e-6 keeps the central difference from straddling leaky-relu kinks
    return grad_check(f, enc.flatten_params(), Encoder::flatten_grads(grads), 1e-6);
}

void criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t kBatch = 6, kIn = 4, kD = 5, kK = 5;
    const EtfFrame frame = EtfFrame::build(kD, kK, 3);
    AllocationLedger ledger(kK);
    for (int c = 0; c < static_cast<int>(kK); ++c) ledger.assign(c);
    LossConfig lcfg;

    struct Suite {
        const char* name;
        double worst = 0.0;
    };
    std::vector<Suite> suites{{"sup_align"},  {"unsup_contrastive"}, {"sup_contrastive"},
                              {"base_rep"},   {"cls_cross_entropy"}, {"unsup_cls"},
                              {"unsup_align"}, {"incremental_total"}};

    for (std::uint64_t inst = 0; inst < 100; ++inst) {
        Rng rng(1000 + inst);
        Encoder enc({kIn, 6, kD}, rng);
        const Matrix xa = gaussian_matrix(kBatch, kIn, rng);
        const Matrix xb = gaussian_matrix(kBatch, kIn, rng);
        std::vector<int> labels(kBatch);
        for (auto& y : labels) y = static_cast<int>(rng.uniform_index(3));
        labels[0] = labels[1];  // guarantee a positive pair
        std::vector<std::size_t> cols(kBatch);
        for (auto& c : cols) c = rng.uniform_index(kK);
        const Matrix w = gaussian_matrix(kD, kK, rng, 0.5);
        const Matrix teacher = gaussian_matrix(kBatch, kK, rng);

        auto on_embed = [&](auto&& value_of, auto&& grad_of) {
            auto value = [&](const Encoder& e) { return value_of(e.forward(xa)); };
            auto grads = [&](const Encoder& e) {
                Encoder::Cache cache;
                const Matrix ea = e.forward(xa, &cache);
                return e.backward(cache, grad_of(ea));
            };
            return encoder_grad_error(inst, value, grads, enc);
        };

        // supervised alignment on raw embeddings
        suites[0].worst = std::max(
            suites[0].worst,
            on_embed([&](const Matrix& ea) {
                         return supervised_alignment(ea, labels, frame, ledger).value;
                     },
                     [&](const Matrix& ea) {
                         return supervised_alignment(ea, labels, frame, ledger).grad_embeddings;
                     }));

        // unsupervised contrastive: normalized embeddings of both views
        {
            auto value = [&](const Encoder& e) {
                return unsup_contrastive(normalize_rows(e.forward(xa)),
                                         normalize_rows(e.forward(xb)), lcfg)
                    .value;
            };
            auto grads = [&](const Encoder& e) {
                Encoder::Cache ca, cb;
                const Matrix ea = e.forward(xa, &ca);
                const Matrix eb = e.forward(xb, &cb);
                const LossResult r =
                    unsup_contrastive(normalize_rows(ea), normalize_rows(eb), lcfg);
                Encoder::Grads ga = e.backward(ca, normalize_rows_backward(ea, r.grad_embeddings));
                const Encoder::Grads gb =
                    e.backward(cb, normalize_rows_backward(eb, r.grad_view_b));
                for (std::size_t l = 0; l < ga.d_weights.size(); ++l) {
                    axpy(ga.d_weights[l], 1.0, gb.d_weights[l]);
                    axpy(ga.d_biases[l], 1.0, gb.d_biases[l]);
                }
                return ga;
            };
            suites[1].worst =
                std::max(suites[1].worst, encoder_grad_error(inst, value, grads, enc));
        }

        // supervised contrastive on the normalized first view
        {
            auto value = [&](const Encoder& e) {
                return sup_contrastive(normalize_rows(e.forward(xa)), labels, lcfg).value;
            };
            auto grads = [&](const Encoder& e) {
                Encoder::Cache ca;
                const Matrix ea = e.forward(xa, &ca);
                const LossResult r = sup_contrastive(normalize_rows(ea), labels, lcfg);
                return e.backward(ca, normalize_rows_backward(ea, r.grad_embeddings));
            };
            suites[2].worst =
                std::max(suites[2].worst, encoder_grad_error(inst, value, grads, enc));
        }

        // mixed representation loss
        {
            auto value = [&](const Encoder& e) {
                return base_rep(normalize_rows(e.forward(xa)), normalize_rows(e.forward(xb)),
                                labels, lcfg)
                    .value;
            };
            auto grads = [&](const Encoder& e) {
                Encoder::Cache ca, cb;
                const Matrix ea = e.forward(xa, &ca);
                const Matrix eb = e.forward(xb, &cb);
                const LossResult r =
                    base_rep(normalize_rows(ea), normalize_rows(eb), labels, lcfg);
                Encoder::Grads ga = e.backward(ca, normalize_rows_backward(ea, r.grad_embeddings));
                const Encoder::Grads gb =
                    e.backward(cb, normalize_rows_backward(eb, r.grad_view_b));
                for (std::size_t l = 0; l < ga.d_weights.size(); ++l) {
                    axpy(ga.d_weights[l], 1.0, gb.d_weights[l]);
                    axpy(ga.d_biases[l], 1.0, gb.d_biases[l]);
                }
                return ga;
            };
            suites[3].worst =
                std::max(suites[3].worst, encoder_grad_error(inst, value, grads, enc));
        }

        // labeled classification head
        suites[4].worst = std::max(
            suites[4].worst,
            on_embed([&](const Matrix& ea) { return cls_cross_entropy(ea, labels, w).value; },
                     [&](const Matrix& ea) {
                         return cls_cross_entropy(ea, labels, w).grad_embeddings;
                     }));

        // pseudo-label classification, teacher fixed
        suites[5].worst = std::max(
            suites[5].worst,
            on_embed(
                [&](const Matrix& ea) { return unsup_cls(matmul(ea, w), teacher, lcfg).value; },
                [&](const Matrix& ea) {
                    const LossResult r = unsup_cls(matmul(ea, w), teacher, lcfg);
                    return matmul_nt(r.grad_embeddings, w);
                }));

        // alignment with explicit target columns
        suites[6].worst = std::max(
            suites[6].worst,
            on_embed([&](const Matrix& ea) { return unsup_alignment(ea, cols, frame).value; },
                     [&](const Matrix& ea) {
                         return unsup_alignment(ea, cols, frame).grad_embeddings;
                     }));

        // full incremental objective as assembled in training
        {
            auto value = [&](const Encoder& e) {
                const Matrix ea = e.forward(xa);
                const Matrix eb = e.forward(xb);
                const double align = unsup_alignment(ea, cols, frame).value;
                const double rep =
                    unsup_contrastive(normalize_rows(ea), normalize_rows(eb), lcfg).value;
                const double cls = unsup_cls(matmul(ea, w), teacher, lcfg).value;
                return lcfg.lambda_a * align + rep + cls;
            };
            auto grads = [&](const Encoder& e) {
                Encoder::Cache ca, cb;
                const Matrix ea = e.forward(xa, &ca);
                const Matrix eb = e.forward(xb, &cb);
                const LossResult align = unsup_alignment(ea, cols, frame);
                const LossResult rep =
                    unsup_contrastive(normalize_rows(ea), normalize_rows(eb), lcfg);
                const LossResult cls = unsup_cls(matmul(ea, w), teacher, lcfg);

                Matrix grad_ea = normalize_rows_backward(ea, rep.grad_embeddings);
                axpy(grad_ea, lcfg.lambda_a, align.grad_embeddings);
                axpy(grad_ea, 1.0, matmul_nt(cls.grad_embeddings, w));
                Encoder::Grads ga = e.backward(ca, grad_ea);
                const Encoder::Grads gb =
                    e.backward(cb, normalize_rows_backward(eb, rep.grad_view_b));
                for (std::size_t l = 0; l < ga.d_weights.size(); ++l) {
                    axpy(ga.d_weights[l], 1.0, gb.d_weights[l]);
                    axpy(ga.d_biases[l], 1.0, gb.d_biases[l]);
                }
                return ga;
            };
            suites[7].worst =
                std::max(suites[7].worst, encoder_grad_error(inst, value, grads, enc));
        }
    }

    const double secs = seconds_since(t0);
    double worst = 0.0;
    std::string worst_name = "none";
    for (const auto& s : suites)
        if (s.worst > worst) {
            worst = s.worst;
            worst_name = s.name;
        }
    const bool ok = worst <= 1e-4 && secs < 60.0;
    report(2, ok,
           fmt("worst rel err %.2e <= 1e-4 (%s), 100 instances x 8 losses, %.1fs < 60s", worst,
               worst_name.c_str(), secs));
}

// ---------------------------------------------------------------- criterion 3

double brute_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::set<int> ps(pred.begin(), pred.end()), ts(truth.begin(), truth.end());
    std::vector<int> pv(ps.begin(), ps.end()), tv(ts.begin(), ts.end());
    while (tv.size() < pv.size()) tv.push_back(-1000 - static_cast<int>(tv.size()));
    while (pv.size() < tv.size()) pv.push_back(-2000 - static_cast<int>(pv.size()));
    std::vector<std::size_t> perm(tv.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::map<int, int> relabel;
        for (std::size_t i = 0; i < pv.size(); ++i) relabel[pv[i]] = tv[perm[i]];
        std::size_t hits = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (relabel[pred[i]] == truth[i]) ++hits;
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return 100.0 * best / pred.size();
}

void criterion_3() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(7);
    bool ok = true;
    double worst = 0.0;

    for (int inst = 0; inst < 100 && ok; ++inst) {
        // clustering accuracy against exhaustive relabeling
        const std::size_t n = 8 + rng.uniform_index(24);
        const int kp = 2 + static_cast<int>(rng.uniform_index(6));
        const int kt = 2 + static_cast<int>(rng.uniform_index(6));
        std::vector<int> pred(n), truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = static_cast<int>(rng.uniform_index(kp));
            truth[i] = static_cast<int>(rng.uniform_index(kt));
        }
        const double got = hungarian_accuracy(pred, truth, {}).all;
        const double want = brute_accuracy(pred, truth);
        worst = std::max(worst, std::abs(got - want));
        if (std::abs(got - want) > 1e-9) ok = false;
    }

    for (int inst = 0; inst < 100 && ok; ++inst) {
        // raw assignment objective against exhaustive minimum
        const std::size_t r = 2 + rng.uniform_index(6);
        const std::size_t c = r + rng.uniform_index(2);
        Matrix cost(r, c);
        for (auto& v : cost.data) v = rng.uniform(-3.0, 3.0);
        const double got = assignment_cost(cost, min_cost_assignment(cost));
        std::vector<std::size_t> cols(c);
        std::iota(cols.begin(), cols.end(), 0);
        double want = 1e300;
        do {
            double s = 0.0;
            for (std::size_t i = 0; i < r; ++i) s += cost(i, cols[i]);
            want = std::min(want, s);
        } while (std::next_permutation(cols.begin(), cols.end()));
        worst = std::max(worst, std::abs(got - want));
        if (std::abs(got - want) > 1e-9) ok = false;
    }

    const double secs = seconds_since(t0);
    ok = ok && secs < 10.0;
    report(3, ok, fmt("200 instances vs exhaustive optimum, worst gap %.2e, %.1fs < 10s", worst,
                      secs));
}

// ---------------------------------------------------------------- criterion 4

void criterion_4() {
    const auto t0 = std::chrono::steady_clock::now();

    struct Row {
        const char* name;
        double stage0_all;
        double final_old;
        double new_acc[5];
        double want_mf;
        double want_md;
    };
    // frozen per-stage reference accuracies and the summary metrics they should yield
    const std::vector<Row> rows{
        {"method-a c100", 91.0, 79.2, {65.1, 62.4, 53.5, 45.1, 43.8}, 11.82, 53.97},
        {"method-a cub", 90.4, 76.0, {71.3, 65.0, 57.3, 51.4, 47.9}, 14.36, 58.57},
        {"method-a tiny", 86.1, 74.5, {52.8, 51.6, 51.1, 42.8, 39.9}, 11.66, 47.88},
        {"method-a in100", 96.2, 93.0, {83.8, 73.7, 72.9, 68.4, 66.6}, 3.24, 73.08},
        {"method-b c100", 90.4, 61.0, {56.1, 49.3, 49.8, 50.3, 51.3}, 29.40, 51.36},
        {"method-b cub", 90.3, 60.5, {63.7, 63.6, 39.1, 49.7, 49.5}, 29.77, 53.13},
        {"method-b tiny", 85.9, 56.7, {61.1, 42.3, 36.5, 41.3, 35.7}, 29.20, 43.38},
        {"method-b in100", 96.2, 79.1, {70.4, 69.8, 77.0, 73.4, 73.8}, 17.09, 72.88},
    };

    bool ok = true;
    std::string bad;
    for (const auto& r : rows) {
        std::vector<AccuracyTriple> inc(5);
        for (int t = 0; t < 5; ++t) inc[t].new_acc = r.new_acc[t];
        inc.back().old_acc = r.final_old;
        const double mf = forgetting_rate(inc, r.stage0_all);
        const double md = discovery_rate(inc);
        if (std::abs(mf - r.want_mf) > 0.1) {
            ok = false;
            bad += fmt(" [%s M_f %.2f vs %.2f]", r.name, mf, r.want_mf);
        }
        if (std::abs(md - r.want_md) > 0.1) {
            ok = false;
            bad += fmt(" [%s M_d %.2f vs %.2f]", r.name, md, r.want_md);
        }
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 1.0;
    report(4, ok,
           fmt("8 reference (method, dataset) pairs within +/-0.1%s, %.2fs < 1s",
               bad.empty() ? "" : bad.c_str(), secs));
}

// ------------------------------------------------------- criteria 5, 9, 10

RunConfig default_benchmark() {
    RunConfig cfg;  // the built-in defaults are the reference benchmark
    apply_preset(cfg, "desk");
    return cfg;
}

void criteria_5_10() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = default_benchmark();
    const ProtocolResult res = run_single(cfg, cfg.seed);
    const double secs = seconds_since(t0);

    double min_all = 1e300;
    for (const auto& s : res.stages) min_all = std::min(min_all, s.acc.all);
    const double mf = res.m_f.value_or(1e300);
    const bool ok5 = min_all >= 90.0 && mf <= 5.0 && secs < 120.0;
    report(5, ok5,
           fmt("min acc_all %.1f >= 90, M_f %.2f <= 5, %.1fs < 120s", min_all, mf, secs));

    const auto& trace = res.stages.front().nc_trace;
    bool ok10 = trace.size() >= 2;
    double first_nc1 = 0.0, last_nc1 = 0.0, last_nc3 = 0.0;
    if (ok10) {
        first_nc1 = trace.front().nc1;
        last_nc1 = trace.back().nc1;
        last_nc3 = trace.back().nc3;
        ok10 = last_nc1 * 10.0 < first_nc1 && last_nc3 >= 0.9;
    }
    report(10, ok10,
           fmt("base nc1 %.4f -> %.4f (>=10x drop), final nc3 %.3f >= 0.9", first_nc1, last_nc1,
               last_nc3));
}

void criterion_9() {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "goal_acceptance_det";
    fs::remove_all(base);

    RunConfig cfg = default_benchmark();
    // a smaller stream keeps this criterion quick; determinism is about the
    // pipeline, not the workload size
    cfg.stream.total_classes = 8;
    cfg.stream.base_classes = 4;
    cfg.stream.samples_per_class_train = 20;
    cfg.stream.samples_per_class_test = 8;
    cfg.stream.input_dim = 16;
    cfg.frame_d = 16;
    cfg.session.base_epochs = 6;
    cfg.session.incremental_epochs = 4;

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    auto strip_wall = [](const std::string& text) {
        std::istringstream in(text);
        std::ostringstream out;
        std::string line;
        while (std::getline(in, line))
            if (line.find("wall_time_s") == std::string::npos) out << line << '\n';
        return out.str();
    };

    run_and_write(cfg, (base / "a").string());
    run_and_write(cfg, (base / "b").string());

    const bool stages_same = slurp(base / "a" / "stages.csv") == slurp(base / "b" / "stages.csv");
    const bool summary_same = strip_wall(slurp(base / "a" / "summary.json")) ==
                              strip_wall(slurp(base / "b" / "summary.json"));
    report(9, stages_same && summary_same,
           fmt("stages.csv byte-identical: %s, summary.json (minus wall time): %s",
               stages_same ? "yes" : "no", summary_same ? "yes" : "no"));
    fs::remove_all(base);
}

// ---------------------------------------------------------------- criterion 6

void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = default_benchmark();
    const auto cells = run_ablation_grid(cfg, 5);
    auto cell = [&](bool sup, bool unsup) -> const AblationCell& {
        for (const auto& c : cells)
            if (c.sup == sup && c.unsup == unsup) return c;
        throw std::logic_error("missing ablation cell");
    };

    // marginal means over the 4-cell grid
    const double new_on = (cell(false, true).mean_new + cell(true, true).mean_new) / 2.0;
    const double new_off = (cell(false, false).mean_new + cell(true, false).mean_new) / 2.0;
    const double old_on = (cell(true, false).mean_old + cell(true, true).mean_old) / 2.0;
    const double old_off = (cell(false, false).mean_old + cell(false, true).mean_old) / 2.0;

    const double secs = seconds_since(t0);
    const bool ok = new_on > new_off && old_on > old_off && secs < 600.0;
    report(6, ok,
           fmt("New %.1f > %.1f (unsup on/off), Old %.1f > %.1f (sup on/off), 5 seeds, %.0fs < "
               "600s",
               new_on, new_off, old_on, old_off, secs));
}

// ---------------------------------------------------------------- criterion 7

void criterion_7() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(11);
    bool ok = true;
    for (int inst = 0; inst < 1000 && ok; ++inst) {
        const std::size_t n = 1 + rng.uniform_index(50);
        const std::size_t k = 2 + rng.uniform_index(9);
        Matrix probs(n, k);
        for (std::size_t i = 0; i < n; ++i) {
            if (inst % 3 == 0 && i > 0 && rng.uniform() < 0.5) {
                // duplicated rows force entropy ties
                for (std::size_t j = 0; j < k; ++j) probs(i, j) = probs(i - 1, j);
                continue;
            }
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                probs(i, j) = rng.uniform() + 1e-6;
                s += probs(i, j);
            }
            for (std::size_t j = 0; j < k; ++j) probs(i, j) /= s;
        }

        for (double alpha : {0.1, 0.5, 0.7, 1.0}) {
            // full-sort oracle with stable tie-breaking by index
            std::vector<std::pair<double, std::size_t>> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = {entropy(probs.row(i)), i};
            std::stable_sort(order.begin(), order.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            std::size_t count = static_cast<std::size_t>(alpha * n);
            if (count < 1) count = 1;
            std::vector<std::size_t> want;
            for (std::size_t i = 0; i < count; ++i) want.push_back(order[i].second);
            std::sort(want.begin(), want.end());

            if (select_confident(probs, alpha).indices != want) {
                ok = false;
                break;
            }
        }
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 5.0;
    report(7, ok, fmt("1000 prediction sets x 4 alphas match the sort oracle, %.1fs < 5s", secs));
}

// ---------------------------------------------------------------- criterion 8

void criterion_8() {
    const auto t0 = std::chrono::steady_clock::now();
    bool monotone = true, beats = true;

    // fixed fixture set: blobs and unstructured clouds of varied shape
    struct Fixture {
        std::size_t n, d, k;
        double spread;
        std::uint64_t seed;
    };
    const std::vector<Fixture> fixtures{
        {60, 4, 3, 0.1, 1}, {80, 6, 5, 0.3, 2},  {50, 3, 4, 1.0, 3},
        {120, 8, 6, 0.5, 4}, {40, 5, 2, 0.2, 5}, {100, 10, 7, 1.5, 6},
    };

    for (const auto& fx : fixtures) {
        Rng rng(fx.seed);
        Matrix points(fx.n, fx.d);
        for (std::size_t i = 0; i < fx.n; ++i) {
            const std::size_t c = i % fx.k;
            for (std::size_t j = 0; j < fx.d; ++j)
                points(i, j) = (c == j % fx.k ? 3.0 : -1.0) + fx.spread * rng.gaussian();
        }

        Rng km_rng(fx.seed + 100);
        const ClusterResult res = kmeans(points, fx.k, km_rng);
        for (std::size_t i = 1; i < res.inertia_trace.size(); ++i)
            if (res.inertia_trace[i] > res.inertia_trace[i - 1] + 1e-12) monotone = false;

        // 50 random restarts: random data points as centers, one assignment
        const Matrix pn = normalize_rows(points);
        Rng rr(fx.seed + 200);
        double best_baseline = 1e300;
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<std::size_t> picks(fx.k);
            for (auto& p : picks) p = rr.uniform_index(fx.n);
            double cost = 0.0;
            for (std::size_t i = 0; i < fx.n; ++i) {
                double bd = 1e300;
                for (std::size_t c = 0; c < fx.k; ++c) {
                    double d2 = 0.0;
                    for (std::size_t j = 0; j < fx.d; ++j) {
                        const double dv = pn(i, j) - pn(picks[c], j);
                        d2 += dv * dv;
                    }
                    bd = std::min(bd, d2);
                }
                cost += bd;
            }
            best_baseline = std::min(best_baseline, cost);
        }
        if (res.inertia > best_baseline + 1e-9) beats = false;
    }

    const double secs = seconds_since(t0);
    const bool ok = monotone && beats && secs < 30.0;
    report(8, ok,
           fmt("inertia monotone: %s, final <= best of 50 random restarts: %s, %.1fs < 30s",
               monotone ? "yes" : "no", beats ? "yes" : "no", secs));
}

}  // namespace

int main() {
#if defined(__GLIBC__)
    // the frame sweep allocates ~200k short-lived matrices; stop glibc from
    // trimming the heap between them (saves ~1s of page-fault churn)
    mallopt(M_TRIM_THRESHOLD, 128 << 20);
    mallopt(M_MMAP_THRESHOLD, 128 << 20);
#endif
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criteria_5_10();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf("%d of 10 criteria failed\n", failures);
    return failures;
}
