#include "vrc/image_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "vrc/scene_io.hpp"

namespace vrc {

namespace {

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw IoError("cannot write " + path);
  return os;
}

void check(const std::ostream& os, const std::string& path) {
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace

void write_pfm(const std::string& path, const Image& img) {
  std::ofstream os = open_out(path, true);
  os << "PF\n" << img.width << ' ' << img.height << "\n-1.0\n";
  for (int j = img.height - 1; j >= 0; --j) {
    for (int i = 0; i < img.width; ++i) {
      for (int c = 0; c < 3; ++c) {
        const float v = static_cast<float>(img.at(i, j)[c]);
        os.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    }
  }
  check(os, path);
}

Image read_pfm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  is >> magic >> w >> h >> scale;
  is.get();
  if (magic != "PF" || w < 1 || h < 1 || scale >= 0.0) throw IoError(path + ": not a little-endian color PFM");
  Image img(w, h);
  for (int j = h - 1; j >= 0; --j) {
    for (int i = 0; i < w; ++i) {
      for (int c = 0; c < 3; ++c) {
        float v = 0.0f;
        is.read(reinterpret_cast<char*>(&v), sizeof v);
        img.at(i, j)[c] = v;
      }
    }
  }
  if (!is) throw IoError(path + ": truncated PFM");
  return img;
}

void write_ppm(const std::string& path, const Image& img) {
  std::ofstream os = open_out(path, true);
  os << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  for (int j = 0; j < img.height; ++j) {
    for (int i = 0; i < img.width; ++i) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::pow(std::clamp(img.at(i, j)[c], 0.0, 1.0), 1.0 / 2.2);
        os.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
      }
    }
  }
  check(os, path);
}

void write_field_csv(const std::string& path, const FieldGrid& grid, const RenderOutput& out) {
  std::ofstream os = open_out(path, false);
  os.precision(10);
  os << "x,y,r,g,b,single_r,single_g,single_b,multiple_r,multiple_g,multiple_b\n";
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const Vec2 p = grid.cell_center(i, j);
      os << p[0] << ',' << p[1];
      for (const Image* im : {&out.total, &out.single, &out.multiple})
        for (int c = 0; c < 3; ++c) os << ',' << im->at(i, j)[c];
      os << '\n';
    }
  }
  check(os, path);
}

void write_gradient_csv(const std::string& path, const std::vector<GradientSample>& samples) {
  std::ofstream os = open_out(path, false);
  os.precision(10);
  os << "x,y,kind,value,ours_x,ours_y,baseline_x,baseline_y,reference_x,reference_y\n";
  for (const auto& s : samples) {
    os << s.position[0] << ',' << s.position[1] << ',' << to_string(s.kind) << ',' << s.value << ',' << s.ours[0]
       << ',' << s.ours[1] << ',' << s.baseline[0] << ',' << s.baseline[1] << ',' << s.reference[0] << ','
       << s.reference[1] << '\n';
  }
  check(os, path);
}

}  // namespace vrc
