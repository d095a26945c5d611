#include "goal/config.hpp"

#include <fstream>
#include <sstream>

namespace goal {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::size_t> parse_size_list(const std::string& v, const std::string& key) {
    std::vector<std::size_t> out;
    std::istringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (cell.empty()) continue;
        try {
            out.push_back(std::stoul(cell));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': expected comma-separated integers");
        }
    }
    return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

}  // namespace

void apply_preset(RunConfig& cfg, const std::string& preset) {
    if (preset == "desk") {
        cfg.session.base_epochs = 30;
        cfg.session.incremental_epochs = 10;
        cfg.session.sgd.batch_size = 32;
    } else if (preset == "paper") {
        cfg.session.base_epochs = 100;
        cfg.session.incremental_epochs = 30;
        cfg.session.sgd.batch_size = 128;
    } else {
        throw ConfigError("unknown preset '" + preset + "' (expected desk or paper)");
    }
    cfg.preset = preset;
}

void RunConfig::validate() const {
    if (embeddings_path.empty()) stream.validate();
    session.validate();
    const std::size_t k = resolved_frame_k();
    if (k < 2) throw ConfigError("frame.K must be >= 2");
    if (frame_d < k) throw ConfigError("frame.d must be >= frame.K");
}

std::vector<std::size_t> RunConfig::encoder_dims() const {
    std::vector<std::size_t> dims;
    dims.push_back(stream.input_dim);
    dims.insert(dims.end(), encoder_hidden.begin(), encoder_hidden.end());
    dims.push_back(frame_d);
    return dims;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::string pending_preset;

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        auto as_double = [&]() {
            try {
                return std::stod(val);
            } catch (const std::exception&) {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": config key '" + key +
                                  "': expected a number, got '" + val + "'");
            }
        };
        auto as_size = [&]() {
            try {
                return static_cast<std::size_t>(std::stoul(val));
            } catch (const std::exception&) {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": config key '" + key +
                                  "': expected an integer, got '" + val + "'");
            }
        };
        auto as_u64 = [&]() {
            try {
                return static_cast<std::uint64_t>(std::stoull(val));
            } catch (const std::exception&) {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": config key '" + key +
                                  "': expected an integer, got '" + val + "'");
            }
        };

        if (key == "preset") pending_preset = val;
        else if (key == "seed") cfg.seed = as_u64();
        else if (key == "output_dir") cfg.output_dir = val;
        else if (key == "embeddings_path") cfg.embeddings_path = val;
        else if (key == "alpha") cfg.session.alpha = as_double();
        else if (key == "sigma_aug") cfg.session.sigma_aug = as_double();
        else if (key == "sup_etf_align") cfg.session.sup_etf_align = parse_bool(val, key);
        else if (key == "unsup_etf_align") cfg.session.unsup_etf_align = parse_bool(val, key);
        else if (key == "literal_eq5_denominator")
            cfg.session.loss.literal_eq5_denominator = parse_bool(val, key);
        else if (key == "literal_unassigned_only")
            cfg.session.literal_unassigned_only = parse_bool(val, key);
        else if (key == "recompute_match_per_epoch")
            cfg.session.recompute_match_per_epoch = parse_bool(val, key);
        else if (key == "tau") cfg.session.loss.tau = as_double();
        else if (key == "lambda_rep") cfg.session.loss.lambda_rep = as_double();
        else if (key == "lambda_A") cfg.session.loss.lambda_a = as_double();
        else if (key == "epsilon") cfg.session.loss.epsilon = as_double();
        else if (key == "teacher_temp") cfg.session.loss.teacher_temp = as_double();
        else if (key == "learning_rate") cfg.session.sgd.learning_rate = as_double();
        else if (key == "momentum") cfg.session.sgd.momentum = as_double();
        else if (key == "batch_size") cfg.session.sgd.batch_size = as_size();
        else if (key == "base_epochs") cfg.session.base_epochs = as_size();
        else if (key == "incremental_epochs") cfg.session.incremental_epochs = as_size();
        else if (key == "nc_checkpoints") cfg.session.nc_checkpoints = as_size();
        else if (key == "frame.d") cfg.frame_d = as_size();
        else if (key == "frame.K") cfg.frame_k = as_size();
        else if (key == "frame.seed") cfg.frame_seed = as_u64();
        else if (key == "encoder_hidden") cfg.encoder_hidden = parse_size_list(val, key);
        else if (key == "stream.total_classes") cfg.stream.total_classes = as_size();
        else if (key == "stream.base_classes") cfg.stream.base_classes = as_size();
        else if (key == "stream.stages") cfg.stream.stages = as_size();
        else if (key == "stream.new_per_stage") cfg.stream.new_per_stage = parse_size_list(val, key);
        else if (key == "stream.samples_per_class_train")
            cfg.stream.samples_per_class_train = as_size();
        else if (key == "stream.samples_per_class_test")
            cfg.stream.samples_per_class_test = as_size();
        else if (key == "stream.old_class_mix_fraction")
            cfg.stream.old_class_mix_fraction = as_double();
        else if (key == "stream.input_dim") cfg.stream.input_dim = as_size();
        else if (key == "stream.class_separation_deg")
            cfg.stream.class_separation_deg = as_double();
        else if (key == "stream.noise_sigma") cfg.stream.noise_sigma = as_double();
        else if (key == "stream.seed") cfg.stream.seed = as_u64();
        else
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown config key '" +
                              key + "'");
    }

    if (!pending_preset.empty()) apply_preset(cfg, pending_preset);
    // preset sets epochs/batch defaults; explicit keys win
    if (!pending_preset.empty()) {
        // re-parse explicit overrides for the keys the preset touches
        std::istringstream in2(text);
        std::string l2;
        while (std::getline(in2, l2)) {
            const auto hash = l2.find('#');
            if (hash != std::string::npos) l2 = l2.substr(0, hash);
            l2 = trim(l2);
            const auto eq = l2.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = trim(l2.substr(0, eq));
            const std::string val = trim(l2.substr(eq + 1));
            if (key == "base_epochs") cfg.session.base_epochs = std::stoul(val);
            else if (key == "incremental_epochs") cfg.session.incremental_epochs = std::stoul(val);
            else if (key == "batch_size") cfg.session.sgd.batch_size = std::stoul(val);
        }
    }

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

}  // namespace goal
