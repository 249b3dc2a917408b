#include "snn/datasets.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>

#include "snn/encoding.hpp"
#include "snn/image_io.hpp"
#include "snn/rng.hpp"

namespace fs = std::filesystem;

namespace snn {

std::string to_string(SyntheticClass c) {
  switch (c) {
    case SyntheticClass::bar_left: return "bar-left";
    case SyntheticClass::bar_right: return "bar-right";
    case SyntheticClass::bar_up: return "bar-up";
    case SyntheticClass::bar_down: return "bar-down";
    case SyntheticClass::static_bar: return "static-bar";
    case SyntheticClass::blink: return "blink";
  }
  return "?";
}

std::optional<SyntheticClass> parse_synthetic_class(const std::string& name) {
  for (SyntheticClass c :
       {SyntheticClass::bar_left, SyntheticClass::bar_right,
        SyntheticClass::bar_up, SyntheticClass::bar_down,
        SyntheticClass::static_bar, SyntheticClass::blink}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

namespace {

int wrap(int v, int m) {
  v %= m;
  return v < 0 ? v + m : v;
}

}  // namespace

FrameStack render_synthetic_video(SyntheticClass c, int w, int h, int td,
                                  int thickness, int speed, int start_pos) {
  FrameStack out = make_frame_stack(w, h, td);
  const bool vertical = c != SyntheticClass::bar_up &&
                        c != SyntheticClass::bar_down;
  const int extent = vertical ? w : h;
  for (int z = 0; z < td; ++z) {
    if (c == SyntheticClass::blink && z % 2 == 1) continue;
    int pos = start_pos;
    if (c == SyntheticClass::bar_right || c == SyntheticClass::bar_down) {
      pos = wrap(start_pos + speed * z, extent);
    } else if (c == SyntheticClass::bar_left || c == SyntheticClass::bar_up) {
      pos = wrap(start_pos - speed * z, extent);
    }
    for (int off = 0; off < thickness; ++off) {
      const int p = wrap(pos + off, extent);
      if (vertical) {
        for (int y = 0; y < h; ++y) out.at(p, y, z) = 1.0;
      } else {
        for (int x = 0; x < w; ++x) out.at(x, p, z) = 1.0;
      }
    }
  }
  return out;
}

std::vector<LabeledVideo> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.classes.size() < 2) {
    throw std::invalid_argument("generate_synthetic: need >= 2 classes");
  }
  if (spec.speed < 1 || spec.noise < 0.0 || spec.noise >= 0.5) {
    throw std::invalid_argument("generate_synthetic: bad speed or noise");
  }
  Rng rng(spec.seed);
  std::vector<LabeledVideo> out;
  out.reserve(spec.classes.size() * std::size_t(spec.count_per_class));
  for (std::size_t ci = 0; ci < spec.classes.size(); ++ci) {
    const SyntheticClass c = spec.classes[ci];
    const bool vertical =
        c != SyntheticClass::bar_up && c != SyntheticClass::bar_down;
    const int extent = vertical ? spec.width : spec.height;
    for (int s = 0; s < spec.count_per_class; ++s) {
      LabeledVideo v;
      v.label = int(ci);
      v.action = to_string(c);
      v.video_id = v.action + "_" + std::to_string(s);
      const int start = int(rng.below(extent));
      v.frames = render_synthetic_video(c, spec.width, spec.height, spec.td,
                                        spec.thickness, spec.speed, start);
      if (spec.noise > 0.0) {
        for (double& px : v.frames.data) {
          if (rng.uniform() < spec.noise) px = 1.0 - px;
        }
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

SplitProtocol kth_protocol() {
  SplitProtocol p;
  p.kind = SplitKind::fixed_subject_split;
  p.train_subjects = {"11", "12", "13", "14", "15", "16", "17", "18"};
  p.val_subjects = {"19", "20", "21", "23", "24", "25", "01", "04"};
  p.test_subjects = {"02", "03", "05", "06", "07", "08", "09", "10", "22"};
  return p;
}

namespace {

std::vector<std::string> sorted_subdirs(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

struct RawVideo {
  std::string subject, action, video_id;
  std::vector<fs::path> frames;
};

}  // namespace

std::vector<DatasetSplit> load_frame_dataset(const std::string& root,
                                             const SplitProtocol& protocol,
                                             int frames_per_video, int skip) {
  if (!fs::is_directory(root)) {
    throw std::runtime_error("missing directory: " + root);
  }
  std::vector<RawVideo> videos;
  std::vector<std::string> subjects = sorted_subdirs(root);
  std::map<std::string, int> action_ids;
  for (const std::string& subject : subjects) {
    for (const std::string& action : sorted_subdirs(fs::path(root) / subject)) {
      action_ids.emplace(action, 0);
      for (const std::string& vid :
           sorted_subdirs(fs::path(root) / subject / action)) {
        RawVideo v;
        v.subject = subject;
        v.action = action;
        v.video_id = subject + "/" + action + "/" + vid;
        for (const auto& entry :
             fs::directory_iterator(fs::path(root) / subject / action / vid)) {
          if (entry.is_regular_file()) v.frames.push_back(entry.path());
        }
        std::sort(v.frames.begin(), v.frames.end());
        videos.push_back(std::move(v));
      }
    }
  }
  std::vector<std::string> actions;
  for (auto& [name, id] : action_ids) {
    id = int(actions.size());
    actions.push_back(name);
  }

  auto load_video = [&](const RawVideo& v) {
    LabeledVideo out;
    out.subject = v.subject;
    out.action = v.action;
    out.video_id = v.video_id;
    out.label = action_ids.at(v.action);
    if (v.frames.empty()) {
      throw std::runtime_error("insufficient frames in video " + v.video_id);
    }
    for (std::size_t i = 0; i < v.frames.size(); ++i) {
      const Image2d img = read_pgm(v.frames[i].string());
      if (i == 0) {
        out.frames = make_frame_stack(img.w, img.h, int(v.frames.size()));
      } else if (img.w != out.frames.w || img.h != out.frames.h) {
        throw std::runtime_error("inconsistent frame sizes in video " +
                                 v.video_id);
      }
      std::copy(img.v.begin(), img.v.end(),
                out.frames.data.begin() + std::ptrdiff_t(i) * img.w * img.h);
    }
    if (frames_per_video > 0) {
      try {
        out.frames = sample_frames(out.frames, frames_per_video, skip);
      } catch (const std::exception& e) {
        throw std::runtime_error(std::string(e.what()) + " in video " +
                                 v.video_id);
      }
    }
    return out;
  };

  std::vector<DatasetSplit> splits;
  if (protocol.kind == SplitKind::fixed_subject_split) {
    auto member = [](const std::vector<std::string>& set,
                     const std::string& s) {
      return std::find(set.begin(), set.end(), s) != set.end();
    };
    DatasetSplit split;
    split.actions = actions;
    split.fold_name = "fixed";
    for (const RawVideo& v : videos) {
      if (member(protocol.train_subjects, v.subject)) {
        split.train.push_back(load_video(v));
      } else if (member(protocol.val_subjects, v.subject)) {
        split.val.push_back(load_video(v));
      } else if (member(protocol.test_subjects, v.subject)) {
        split.test.push_back(load_video(v));
      } else {
        throw std::runtime_error("unknown subject id: " + v.subject);
      }
    }
    splits.push_back(std::move(split));
  } else {
    for (const std::string& held_out : subjects) {
      DatasetSplit split;
      split.actions = actions;
      split.fold_name = "holdout-" + held_out;
      for (const RawVideo& v : videos) {
        (v.subject == held_out ? split.test : split.train)
            .push_back(load_video(v));
      }
      splits.push_back(std::move(split));
    }
  }
  return splits;
}

void write_split_manifest(const DatasetSplit& split, std::ostream& out) {
  out << "video_id,subject,action,split\n";
  auto emit = [&](const std::vector<LabeledVideo>& vs, const char* name) {
    for (const LabeledVideo& v : vs) {
      out << v.video_id << ',' << v.subject << ',' << v.action << ',' << name
          << '\n';
    }
  };
  emit(split.train, "train");
  emit(split.val, "val");
  emit(split.test, "test");
}

}  // namespace snn
