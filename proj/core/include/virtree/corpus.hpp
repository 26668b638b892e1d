#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "virtree/defs.hpp"
#include "virtree/metamodel.hpp"
#include "virtree/model.hpp"

namespace virtree {

struct IntRange {
    int lo = 1;
    int hi = 1;
};

enum class NoiseProfile {
    Clean,        // noise never opens a pattern prefix, so parses stay conflict-free
    Mixed,        // occasional label/text decoys that trigger backtracking
    Adversarial,  // long runs of pattern prefixes and button groups
};

/// Knobs for synthetic corpus generation and the measurement protocol.
struct BenchConfig {
    uint64_t seed = 1;
    int module_count = 10;
    IntRange screens_per_module{2, 5};
    IntRange widgets_per_screen{50, 200};
    /// Share of widgets emitted through pattern instantiation; the rest
    /// is noise native widgets.
    double pattern_ratio = 0.5;
    int repeats = 9;
    int drop_high = 2;
    int drop_low = 2;
    NoiseProfile noise = NoiseProfile::Mixed;
};

/// One synthetic module: a root Form holding one Container per screen,
/// deterministic under (config.seed, module_index). Always valid against
/// the native metamodel.
Model generate_module(const BenchConfig& config, const std::vector<VirtualWidgetDef>& defs,
                      const Metamodel& mm, int module_index);

/// Convenience for tests and microbenchmarks: a Form with one screen of
/// roughly `target_widgets` widgets.
Model generate_screen_model(uint64_t seed, int target_widgets, double pattern_ratio,
                            NoiseProfile noise, const std::vector<VirtualWidgetDef>& defs,
                            const Metamodel& mm);

/// Writes `module_count` model files (mod_0001.xml, ...) into `out_dir`
/// and returns their paths. Byte-identical across runs for one config.
std::vector<std::string> gen_corpus(const BenchConfig& config,
                                    const std::vector<VirtualWidgetDef>& defs,
                                    const Metamodel& mm, const std::string& out_dir);

} // namespace virtree
