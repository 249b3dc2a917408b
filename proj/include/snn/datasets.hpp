#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "snn/spike_tensor.hpp"

namespace snn {

enum class SyntheticClass {
  bar_left,
  bar_right,
  bar_up,
  bar_down,
  static_bar,
  blink,
};

std::string to_string(SyntheticClass c);
std::optional<SyntheticClass> parse_synthetic_class(const std::string& name);

struct SyntheticSpec {
  std::vector<SyntheticClass> classes;
  int width = 32, height = 32, td = 8;
  int thickness = 3;
  int speed = 1;            // pixels per frame
  double noise = 0.0;       // per-pixel flip probability
  int count_per_class = 10;
  std::uint64_t seed = 0;
};

struct LabeledVideo {
  FrameStack frames;
  int label = 0;
  std::string action;
  std::string subject;   // frame datasets only
  std::string video_id;
};

// Noise-free single video: bar-left/right translate a full-height vertical
// bar with wraparound, bar-up/down a full-width horizontal one; static-bar
// never moves; blink draws the bar on even frames only.
FrameStack render_synthetic_video(SyntheticClass c, int w, int h, int td,
                                  int thickness, int speed, int start_pos);

// Deterministic given spec.seed; labels follow the order of spec.classes.
std::vector<LabeledVideo> generate_synthetic(const SyntheticSpec& spec);

enum class SplitKind { fixed_subject_split, leave_one_out };

struct SplitProtocol {
  SplitKind kind = SplitKind::fixed_subject_split;
  std::vector<std::string> train_subjects, val_subjects, test_subjects;
};

// The standard KTH subject assignment.
SplitProtocol kth_protocol();

struct DatasetSplit {
  std::vector<LabeledVideo> train, val, test;
  std::vector<std::string> actions;  // sorted; index = label
  std::string fold_name;
};

// Layout: root/<subject>/<action>/<video>/<frame>.pgm, frames in
// lexicographic order. Fixed split yields one DatasetSplit, leave-one-out
// one fold per subject. frames_per_video <= 0 keeps every frame.
std::vector<DatasetSplit> load_frame_dataset(const std::string& root,
                                             const SplitProtocol& protocol,
                                             int frames_per_video, int skip);

// CSV: video_id, subject, action, split.
void write_split_manifest(const DatasetSplit& split, std::ostream& out);

}  // namespace snn
