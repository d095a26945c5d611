#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "goal/data.hpp"
#include "goal/session.hpp"

namespace goal {

// Raised on malformed or out-of-range configuration; carries the offending
// key (and line when known) so the CLI can exit 2 with a usable message.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    StreamSpec stream;
    std::string embeddings_path;  // when set, overrides the synthetic stream
    SessionConfig session;
    std::size_t frame_d = 32;
    std::size_t frame_k = 0;      // 0: defaults to stream.total_classes
    std::uint64_t frame_seed = 7;
    std::vector<std::size_t> encoder_hidden = {64};
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::string preset = "desk";  // desk | paper

    std::size_t resolved_frame_k() const { return frame_k ? frame_k : stream.total_classes; }
    void validate() const;
    std::vector<std::size_t> encoder_dims() const;
};

// Flat key=value text, '#' comments. Unknown keys are errors.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<inline>");

void apply_preset(RunConfig& cfg, const std::string& preset);

}  // namespace goal
