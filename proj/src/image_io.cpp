#include "snn/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace snn {

namespace {

// Next whitespace/comment-delimited token of a PGM header.
std::string next_token(std::istream& in) {
  std::string tok;
  for (;;) {
    const int c = in.get();
    if (c == EOF) break;
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(char(c));
  }
  return tok;
}

}  // namespace

Image2d read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("unreadable frame: " + path);
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") {
    throw std::runtime_error("not a portable graymap: " + path);
  }
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw std::runtime_error("unsupported graymap header: " + path);
  }
  Image2d img = make_image(w, h);
  if (magic == "P5") {
    std::vector<unsigned char> raw(std::size_t(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
    if (in.gcount() != std::streamsize(raw.size())) {
      throw std::runtime_error("truncated graymap: " + path);
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
      img.v[i] = double(raw[i]) / maxval;
    }
  } else {
    for (double& v : img.v) {
      const std::string tok = next_token(in);
      if (tok.empty()) throw std::runtime_error("truncated graymap: " + path);
      v = double(std::stoi(tok)) / maxval;
    }
  }
  return img;
}

void write_pgm(const std::string& path, const Image2d& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "P5\n" << img.w << ' ' << img.h << "\n255\n";
  std::vector<unsigned char> raw(img.v.size());
  for (std::size_t i = 0; i < img.v.size(); ++i) {
    const double v = std::clamp(img.v[i], 0.0, 1.0);
    raw[i] = (unsigned char)(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            std::streamsize(raw.size()));
}

}  // namespace snn
