#include "snn/config.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace snn {

namespace {

struct Entry {
  std::string section, key, value;
  int line = 0;
  bool used = false;
};

struct RawConfig {
  std::string name;
  std::vector<Entry> entries;

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error(name + ": " + msg);
  }

  std::optional<std::string> get(const std::string& section,
                                 const std::string& key) {
    std::optional<std::string> found;
    for (Entry& e : entries) {
      if (e.section == section && e.key == key) {
        e.used = true;
        found = e.value;  // last occurrence wins
      }
    }
    return found;
  }
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

RawConfig tokenize(const std::string& text, const std::string& name) {
  RawConfig raw;
  raw.name = name;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        raw.fail("line " + std::to_string(line_no) + ": malformed section");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      raw.fail("line " + std::to_string(line_no) + ": expected key = value");
    }
    if (section.empty()) {
      raw.fail("line " + std::to_string(line_no) + ": key outside a section");
    }
    Entry e;
    e.section = section;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    e.line = line_no;
    if (e.key.empty()) {
      raw.fail("line " + std::to_string(line_no) + ": empty key");
    }
    raw.entries.push_back(std::move(e));
  }
  return raw;
}

int to_int(RawConfig& raw, const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (...) {
    raw.fail("bad integer for " + key + ": '" + v + "'");
  }
}

double to_double(RawConfig& raw, const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (...) {
    raw.fail("bad number for " + key + ": '" + v + "'");
  }
}

bool to_bool(RawConfig& raw, const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  raw.fail("bad boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cur = trim(cur);
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

// "5x5" or "5x5x2"
std::vector<int> parse_dims(RawConfig& raw, const std::string& v,
                            const std::string& key) {
  std::vector<int> dims;
  std::string cur;
  for (char c : v + "x") {
    if (c == 'x') {
      dims.push_back(to_int(raw, trim(cur), key));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (dims.size() != 2 && dims.size() != 3) {
    raw.fail("bad dimensions for " + key + ": '" + v + "'");
  }
  return dims;
}

ExperimentConfig interpret(RawConfig& raw) {
  ExperimentConfig cfg;

  // [dataset]
  const auto type = raw.get("dataset", "type");
  if (!type) raw.fail("missing required key: [dataset] type");
  if (*type == "synthetic") {
    cfg.dataset_type = DatasetType::synthetic;
    const auto classes = raw.get("dataset", "classes");
    if (!classes) raw.fail("missing required key: [dataset] classes");
    for (const std::string& name : split_list(*classes)) {
      const auto c = parse_synthetic_class(name);
      if (!c) raw.fail("unknown synthetic class: '" + name + "'");
      cfg.synthetic.classes.push_back(*c);
    }
    if (auto v = raw.get("dataset", "width"))
      cfg.synthetic.width = to_int(raw, *v, "width");
    if (auto v = raw.get("dataset", "height"))
      cfg.synthetic.height = to_int(raw, *v, "height");
    if (auto v = raw.get("dataset", "frames"))
      cfg.synthetic.td = to_int(raw, *v, "frames");
    if (auto v = raw.get("dataset", "thickness"))
      cfg.synthetic.thickness = to_int(raw, *v, "thickness");
    if (auto v = raw.get("dataset", "speed"))
      cfg.synthetic.speed = to_int(raw, *v, "speed");
    if (auto v = raw.get("dataset", "noise"))
      cfg.synthetic.noise = to_double(raw, *v, "noise");
    if (auto v = raw.get("dataset", "train_per_class"))
      cfg.synthetic.count_per_class = to_int(raw, *v, "train_per_class");
    if (auto v = raw.get("dataset", "test_per_class"))
      cfg.synthetic_test_per_class = to_int(raw, *v, "test_per_class");
  } else if (*type == "frames") {
    cfg.dataset_type = DatasetType::frames;
    const auto path = raw.get("dataset", "path");
    if (!path) raw.fail("missing required key: [dataset] path");
    cfg.frames_root = *path;
    if (auto v = raw.get("dataset", "protocol")) {
      if (*v == "kth" || *v == "fixed") {
        cfg.protocol = SplitKind::fixed_subject_split;
      } else if (*v == "leave-one-out") {
        cfg.protocol = SplitKind::leave_one_out;
      } else {
        raw.fail("unknown protocol: '" + *v + "'");
      }
    }
  } else {
    raw.fail("unknown dataset type: '" + *type + "'");
  }

  // [encoding]
  if (auto v = raw.get("encoding", "frames_per_video"))
    cfg.frames_per_video = to_int(raw, *v, "frames_per_video");
  if (auto v = raw.get("encoding", "skip")) cfg.skip = to_int(raw, *v, "skip");
  if (auto v = raw.get("encoding", "half_scale"))
    cfg.half_scale = to_bool(raw, *v, "half_scale");
  if (auto v = raw.get("encoding", "background_subtraction"))
    cfg.background_subtraction = to_bool(raw, *v, "background_subtraction");
  if (auto v = raw.get("encoding", "dog_size"))
    cfg.dog.size = to_int(raw, *v, "dog_size");
  if (auto v = raw.get("encoding", "dog_sigma_in"))
    cfg.dog.sigma_in = to_double(raw, *v, "dog_sigma_in");
  if (auto v = raw.get("encoding", "dog_sigma_out"))
    cfg.dog.sigma_out = to_double(raw, *v, "dog_sigma_out");

  // [architecture]
  if (auto v = raw.get("architecture", "kind")) {
    if (*v == "2d") {
      cfg.kind = NetKind::two_d;
    } else if (*v == "3d") {
      cfg.kind = NetKind::three_d;
    } else {
      raw.fail("unknown architecture kind: '" + *v + "'");
    }
  }
  const bool is3d = cfg.kind == NetKind::three_d;
  std::vector<int> filters = {16, 32, 64};
  if (auto v = raw.get("architecture", "filters")) {
    filters.clear();
    for (const std::string& f : split_list(*v)) {
      filters.push_back(to_int(raw, f, "filters"));
    }
  }
  std::vector<std::vector<int>> kernels(
      filters.size(), is3d ? std::vector<int>{5, 5, 2} : std::vector<int>{5, 5});
  if (auto v = raw.get("architecture", "kernels")) {
    const auto list = split_list(*v);
    if (list.size() != filters.size()) {
      raw.fail("kernels count must match filters count");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      kernels[i] = parse_dims(raw, list[i], "kernels");
    }
  }
  std::vector<std::vector<int>> conv_strides(
      filters.size(), is3d ? std::vector<int>{1, 1, 2} : std::vector<int>{1, 1});
  if (auto v = raw.get("architecture", "conv_strides")) {
    const auto list = split_list(*v);
    if (list.size() != filters.size()) {
      raw.fail("conv_strides count must match filters count");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      conv_strides[i] = parse_dims(raw, list[i], "conv_strides");
    }
  }
  std::vector<std::vector<int>> pools(
      filters.size(), is3d ? std::vector<int>{2, 2, 2} : std::vector<int>{2, 2});
  if (auto v = raw.get("architecture", "pooling")) {
    const auto list = split_list(*v);
    if (list.size() != filters.size()) {
      raw.fail("pooling count must match filters count");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      pools[i] = parse_dims(raw, list[i], "pooling");
    }
  }
  for (std::size_t i = 0; i < filters.size(); ++i) {
    ConvLayerCfg c;
    c.filters = filters[i];
    c.f_w = kernels[i][0];
    c.f_h = kernels[i][1];
    c.f_td = kernels[i].size() == 3 ? kernels[i][2] : 1;
    c.stride_w = conv_strides[i][0];
    c.stride_h = conv_strides[i][1];
    c.stride_td = conv_strides[i].size() == 3 ? conv_strides[i][2] : 1;
    if (!is3d && (c.f_td != 1 || c.stride_td != 1)) {
      raw.fail("2D architecture cannot have temporal kernel extent");
    }
    cfg.conv_layers.push_back(c);
    PoolLayerCfg p;
    p.p_w = pools[i][0];
    p.p_h = pools[i][1];
    p.p_td = pools[i].size() == 3 ? pools[i][2] : 1;
    p.stride_w = p.p_w;
    p.stride_h = p.p_h;
    p.stride_td = p.p_td;
    cfg.pool_layers.push_back(p);
  }
  if (auto v = raw.get("architecture", "t_obj")) {
    for (const std::string& t : split_list(*v)) {
      cfg.t_obj.push_back(to_double(raw, t, "t_obj"));
    }
  } else {
    const std::vector<double> kth_schedule = {0.65, 0.3, 0.1};
    if (cfg.conv_layers.size() > kth_schedule.size()) {
      raw.fail("missing required key: [architecture] t_obj");
    }
    cfg.t_obj.assign(kth_schedule.begin(),
                     kth_schedule.begin() + std::ptrdiff_t(cfg.conv_layers.size()));
  }
  if (cfg.t_obj.size() != cfg.conv_layers.size()) {
    raw.fail("t_obj schedule length (" + std::to_string(cfg.t_obj.size()) +
             ") must equal conv layer count (" +
             std::to_string(cfg.conv_layers.size()) + ")");
  }
  if (auto v = raw.get("architecture", "grid")) {
    const auto dims = parse_dims(raw, *v, "grid");
    cfg.grid_w = dims[0];
    cfg.grid_h = dims[1];
    cfg.grid_td = dims.size() == 3 ? dims[2] : 1;
  }

  // [plasticity]
  if (auto v = raw.get("plasticity", "tau_stdp"))
    cfg.stdp.tau_stdp = to_double(raw, *v, "tau_stdp");
  // rate and threshold keys accept one value per conv layer; one broadcasts
  auto sched = [&](const char* key, double fallback) {
    std::vector<double> vals;
    if (auto v = raw.get("plasticity", key)) {
      for (const std::string& s : split_list(*v)) {
        vals.push_back(to_double(raw, s, key));
      }
    } else {
      vals.push_back(fallback);
    }
    if (vals.size() == 1) vals.assign(cfg.conv_layers.size(), vals[0]);
    if (vals.size() != cfg.conv_layers.size()) {
      raw.fail(std::string(key) + " schedule length (" +
               std::to_string(vals.size()) + ") must be 1 or the conv layer count (" +
               std::to_string(cfg.conv_layers.size()) + ")");
    }
    return vals;
  };
  cfg.eta_w_sched = sched("eta_w", cfg.stdp.eta_w);
  cfg.eta_th_sched = sched("eta_th", cfg.threshold.eta_th);
  cfg.th_min_sched = sched("th_min", cfg.threshold.th_min);
  cfg.th_init_sched = sched("th_init_mean", cfg.threshold.init_mean);
  cfg.stdp.eta_w = cfg.eta_w_sched[0];
  cfg.threshold.eta_th = cfg.eta_th_sched[0];
  cfg.threshold.th_min = cfg.th_min_sched[0];
  cfg.threshold.init_mean = cfg.th_init_sched[0];
  if (auto v = raw.get("plasticity", "th_init_std"))
    cfg.threshold.init_std = to_double(raw, *v, "th_init_std");

  // [classifier]
  if (auto v = raw.get("classifier", "lambda"))
    cfg.svm.lambda = to_double(raw, *v, "lambda");
  if (auto v = raw.get("classifier", "epochs"))
    cfg.svm.epochs = to_int(raw, *v, "epochs");
  if (auto v = raw.get("classifier", "eta0"))
    cfg.svm.eta0 = to_double(raw, *v, "eta0");

  // [run]
  if (auto v = raw.get("run", "seed"))
    cfg.seed = std::uint64_t(to_int(raw, *v, "seed"));
  if (auto v = raw.get("run", "epochs_per_layer"))
    cfg.epochs_per_layer = to_int(raw, *v, "epochs_per_layer");
  if (auto v = raw.get("run", "report_each_layer"))
    cfg.report_each_layer = to_bool(raw, *v, "report_each_layer");
  if (auto v = raw.get("run", "output")) cfg.output_dir = *v;

  for (const Entry& e : raw.entries) {
    if (!e.used) {
      raw.fail("line " + std::to_string(e.line) + ": unknown key [" +
               e.section + "] " + e.key);
    }
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.dog.size < 3 || cfg.dog.size % 2 == 0) {
    throw std::runtime_error("config: dog_size must be odd and >= 3");
  }
  if (cfg.dataset_type == DatasetType::synthetic) {
    // propagate shapes through the whole stack
    int td = cfg.synthetic.td;
    if (cfg.frames_per_video > 0) td = cfg.frames_per_video;
    if (cfg.background_subtraction) td -= 1;
    int w = cfg.synthetic.width;
    int h = cfg.synthetic.height;
    if (cfg.half_scale) {
      w /= 2;
      h /= 2;
    }
    w -= cfg.dog.size - 1;
    h -= cfg.dog.size - 1;
    if (w < 1 || h < 1 || td < 1) {
      throw std::runtime_error("config: encoded shape is degenerate");
    }
    Shape4 shape{w, h, cfg.kind == NetKind::two_d ? 1 : td, 2};
    try {
      for (std::size_t i = 0; i < cfg.conv_layers.size(); ++i) {
        const ConvLayerCfg& c = cfg.conv_layers[i];
        ConvGeometry g{c.f_w, c.f_h, c.f_td, shape.c, c.filters,
                       c.stride_w, c.stride_h, c.stride_td};
        shape = output_shape(g, shape);
        const PoolLayerCfg& p = cfg.pool_layers[i];
        shape = output_shape(
            PoolGeometry{p.p_w, p.p_h, p.p_td, p.stride_w, p.stride_h,
                         p.stride_td},
            shape);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(
          std::string("config: layer stack is degenerate: ") + e.what());
    }
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& name) {
  RawConfig raw = tokenize(text, name);
  ExperimentConfig cfg = interpret(raw);
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path);
}

void write_config(const ExperimentConfig& cfg, std::ostream& out) {
  auto dims = [](int a, int b, int c, bool three) {
    std::string s = std::to_string(a) + "x" + std::to_string(b);
    if (three) s += "x" + std::to_string(c);
    return s;
  };
  const bool is3d = cfg.kind == NetKind::three_d;
  out << "[dataset]\n";
  if (cfg.dataset_type == DatasetType::synthetic) {
    out << "type = synthetic\nclasses = ";
    for (std::size_t i = 0; i < cfg.synthetic.classes.size(); ++i) {
      out << (i ? ", " : "") << to_string(cfg.synthetic.classes[i]);
    }
    out << "\nwidth = " << cfg.synthetic.width
        << "\nheight = " << cfg.synthetic.height
        << "\nframes = " << cfg.synthetic.td
        << "\nthickness = " << cfg.synthetic.thickness
        << "\nspeed = " << cfg.synthetic.speed
        << "\nnoise = " << cfg.synthetic.noise
        << "\ntrain_per_class = " << cfg.synthetic.count_per_class
        << "\ntest_per_class = " << cfg.synthetic_test_per_class << "\n";
  } else {
    out << "type = frames\npath = " << cfg.frames_root << "\nprotocol = "
        << (cfg.protocol == SplitKind::fixed_subject_split ? "kth"
                                                           : "leave-one-out")
        << "\n";
  }
  out << "\n[encoding]\nframes_per_video = " << cfg.frames_per_video
      << "\nskip = " << cfg.skip
      << "\nhalf_scale = " << (cfg.half_scale ? "true" : "false")
      << "\nbackground_subtraction = "
      << (cfg.background_subtraction ? "true" : "false")
      << "\ndog_size = " << cfg.dog.size
      << "\ndog_sigma_in = " << cfg.dog.sigma_in
      << "\ndog_sigma_out = " << cfg.dog.sigma_out << "\n";
  out << "\n[architecture]\nkind = " << (is3d ? "3d" : "2d") << "\nfilters = ";
  for (std::size_t i = 0; i < cfg.conv_layers.size(); ++i) {
    out << (i ? ", " : "") << cfg.conv_layers[i].filters;
  }
  out << "\nkernels = ";
  for (std::size_t i = 0; i < cfg.conv_layers.size(); ++i) {
    const ConvLayerCfg& c = cfg.conv_layers[i];
    out << (i ? ", " : "") << dims(c.f_w, c.f_h, c.f_td, is3d);
  }
  out << "\nconv_strides = ";
  for (std::size_t i = 0; i < cfg.conv_layers.size(); ++i) {
    const ConvLayerCfg& c = cfg.conv_layers[i];
    out << (i ? ", " : "") << dims(c.stride_w, c.stride_h, c.stride_td, is3d);
  }
  out << "\npooling = ";
  for (std::size_t i = 0; i < cfg.pool_layers.size(); ++i) {
    const PoolLayerCfg& p = cfg.pool_layers[i];
    out << (i ? ", " : "") << dims(p.p_w, p.p_h, p.p_td, is3d);
  }
  out << "\nt_obj = ";
  for (std::size_t i = 0; i < cfg.t_obj.size(); ++i) {
    out << (i ? ", " : "") << cfg.t_obj[i];
  }
  out << "\ngrid = " << dims(cfg.grid_w, cfg.grid_h, cfg.grid_td, is3d) << "\n";
  out << "\n[plasticity]";
  auto sched_line = [&](const char* key, const std::vector<double>& vals,
                        double fallback) {
    out << "\n" << key << " = ";
    if (vals.empty()) {
      out << fallback;
      return;
    }
    for (std::size_t i = 0; i < vals.size(); ++i) {
      out << (i ? ", " : "") << vals[i];
    }
  };
  sched_line("eta_w", cfg.eta_w_sched, cfg.stdp.eta_w);
  out << "\ntau_stdp = " << cfg.stdp.tau_stdp;
  sched_line("eta_th", cfg.eta_th_sched, cfg.threshold.eta_th);
  sched_line("th_min", cfg.th_min_sched, cfg.threshold.th_min);
  sched_line("th_init_mean", cfg.th_init_sched, cfg.threshold.init_mean);
  out << "\nth_init_std = " << cfg.threshold.init_std << "\n";
  out << "\n[classifier]\nlambda = " << cfg.svm.lambda
      << "\nepochs = " << cfg.svm.epochs << "\neta0 = " << cfg.svm.eta0
      << "\n";
  out << "\n[run]\nseed = " << cfg.seed
      << "\nepochs_per_layer = " << cfg.epochs_per_layer
      << "\nreport_each_layer = " << (cfg.report_each_layer ? "true" : "false")
      << "\noutput = " << cfg.output_dir << "\n";
}

}  // namespace snn
