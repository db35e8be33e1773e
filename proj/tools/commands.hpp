#pragma once

#include "config.hpp"

namespace mqe::cli {

void cmd_synth(const RunConfig& cfg);
void cmd_quantize(const RunConfig& cfg);
void cmd_embed(const RunConfig& cfg);
void cmd_gram(const RunConfig& cfg);
void cmd_pca(const RunConfig& cfg);
void cmd_classify(const RunConfig& cfg);
void cmd_stats(const RunConfig& cfg);
void cmd_bench(const RunConfig& cfg);

/// Dispatches on cfg.subcommand after writing <out>/run.json.
void run(const RunConfig& cfg);

}  // namespace mqe::cli
