#include "foldopt/image.hpp"

#include "foldopt/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace foldopt {

Mask::Mask(int w, int h, double res, const Vec2& org)
    : width(w), height(h), resolution(res), origin(org), cells(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0), 0) {
  validate();
}

std::size_t Mask::count() const { return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](auto c) { return c != 0; })); }

void Mask::validate() const {
  if (width <= 0 || height <= 0) throw InputError("mask: empty raster");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw InputError("mask: resolution must be positive");
  if (!origin.allFinite()) throw InputError("mask: non-finite origin");
  if (cells.size() != static_cast<std::size_t>(width) * height) throw InputError("mask: cell count does not match size");
}

void write_pgm(std::ostream& out, const Mask& mask) {
  mask.validate();
  out.precision(17);
  out << "P5\n# resolution " << mask.resolution << " origin " << mask.origin.x() << ' ' << mask.origin.y() << '\n'
      << mask.width << ' ' << mask.height << "\n255\n";
  std::string row(static_cast<std::size_t>(mask.width), '\0');
  for (int r = 0; r < mask.height; ++r) {
    const int j = mask.height - 1 - r;
    for (int i = 0; i < mask.width; ++i) row[static_cast<std::size_t>(i)] = mask.at(i, j) ? char(255) : char(0);
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

namespace {

// Next header token, collecting "# resolution r origin x y" comments on the way.
std::string header_token(std::istream& in, Mask& m, bool& have_meta) {
  std::string tok;
  while (true) {
    int c = in.peek();
    if (c == EOF) throw InputError("pgm: truncated header");
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      std::istringstream ls(line.substr(1));
      std::string key, okey;
      double r, x, y;
      if (ls >> key >> r >> okey >> x >> y && key == "resolution" && okey == "origin") {
        m.resolution = r;
        m.origin = Vec2(x, y);
        have_meta = true;
      }
      continue;
    }
    break;
  }
  while (in.peek() != EOF && !std::isspace(in.peek()) && in.peek() != '#') tok.push_back(static_cast<char>(in.get()));
  return tok;
}

int header_int(std::istream& in, Mask& m, bool& meta, const char* what) {
  const std::string tok = header_token(in, m, meta);
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0 || v > 1 << 16) throw InputError("");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw InputError(std::string("pgm: invalid ") + what + " '" + tok + "'");
  }
}

}  // namespace

Mask read_pgm(std::istream& in) {
  Mask m;
  bool meta = false;
  if (header_token(in, m, meta) != "P5") throw InputError("pgm: not a binary P5 file");
  m.width = header_int(in, m, meta, "width");
  m.height = header_int(in, m, meta, "height");
  const int maxval = header_int(in, m, meta, "maxval");
  if (maxval != 255) throw InputError("pgm: maxval must be 255");
  if (!std::isspace(in.get())) throw InputError("pgm: malformed header");
  m.cells.assign(static_cast<std::size_t>(m.width) * m.height, 0);
  std::string row(static_cast<std::size_t>(m.width), '\0');
  for (int r = 0; r < m.height; ++r) {
    if (!in.read(row.data(), static_cast<std::streamsize>(row.size()))) throw InputError("pgm: truncated pixel data");
    const int j = m.height - 1 - r;
    for (int i = 0; i < m.width; ++i) m.set(i, j, static_cast<unsigned char>(row[static_cast<std::size_t>(i)]) > 127);
  }
  m.validate();
  return m;
}

void save_pgm(const std::string& path, const Mask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  write_pgm(out, mask);
  if (!out) throw InputError("failed writing " + path);
}

Mask load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  return read_pgm(in);
}

int connected_components(const Mask& mask) {
  mask.validate();
  std::vector<int> label(mask.cells.size(), -1);
  std::vector<std::pair<int, int>> stack;
  int n = 0;
  for (int j = 0; j < mask.height; ++j)
    for (int i = 0; i < mask.width; ++i) {
      if (!mask.at(i, j) || label[static_cast<std::size_t>(j) * mask.width + i] >= 0) continue;
      stack.emplace_back(i, j);
      label[static_cast<std::size_t>(j) * mask.width + i] = n;
      while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        const int di[] = {1, -1, 0, 0}, dj[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int x = a + di[k], y = b + dj[k];
          if (x < 0 || y < 0 || x >= mask.width || y >= mask.height || !mask.at(x, y)) continue;
          int& l = label[static_cast<std::size_t>(y) * mask.width + x];
          if (l >= 0) continue;
          l = n;
          stack.emplace_back(x, y);
        }
      }
      ++n;
    }
  return n;
}

namespace {

// Felzenszwalb-Huttenlocher lower envelope over n samples.
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  const double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  int first = 0;
  while (first < n && f[first] == inf) ++first;
  if (first == n) {
    std::fill(d, d + n, inf);
    return;
  }
  v[0] = first;
  z[0] = -inf;
  z[1] = inf;
  for (int q = first + 1; q < n; ++q) {
    if (f[q] == inf) continue;
    auto intersect = [&](int p) { return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p)); };
    double s = intersect(v[k]);
    while (s <= z[k]) s = intersect(v[--k]);
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const std::vector<double>& f, int width, int height) {
  if (width <= 0 || height <= 0 || f.size() != static_cast<std::size_t>(width) * height)
    throw InputError("distance transform: size mismatch");
  const int n = std::max(width, height);
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1), in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
  std::vector<double> g(f.size());
  for (int j = 0; j < height; ++j)
    edt_1d(f.data() + static_cast<std::size_t>(j) * width, g.data() + static_cast<std::size_t>(j) * width, width, v, z);
  std::vector<double> d(f.size());
  for (int i = 0; i < width; ++i) {
    for (int j = 0; j < height; ++j) in[static_cast<std::size_t>(j)] = g[static_cast<std::size_t>(j) * width + i];
    edt_1d(in.data(), out.data(), height, v, z);
    for (int j = 0; j < height; ++j) d[static_cast<std::size_t>(j) * width + i] = out[static_cast<std::size_t>(j)];
  }
  return d;
}

DistanceField distance_field(const Mask& mask) {
  mask.validate();
  const std::size_t fg = mask.count();
  if (fg == 0) throw InputError("distance_field: mask is empty");
  if (fg == mask.cells.size()) throw InputError("distance_field: mask has no background");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> to_fg(mask.cells.size()), to_bg(mask.cells.size());
  for (std::size_t k = 0; k < mask.cells.size(); ++k) {
    to_fg[k] = mask.cells[k] ? 0.0 : inf;
    to_bg[k] = mask.cells[k] ? inf : 0.0;
  }
  const auto dfg = squared_distance_transform(to_fg, mask.width, mask.height);
  const auto dbg = squared_distance_transform(to_bg, mask.width, mask.height);

  DistanceField f;
  f.width = mask.width;
  f.height = mask.height;
  f.resolution = mask.resolution;
  f.origin = mask.origin;
  f.values.resize(mask.cells.size());
  for (std::size_t k = 0; k < mask.cells.size(); ++k) {
    const double cells = mask.cells[k] ? -(std::sqrt(dbg[k]) - 0.5) : std::sqrt(dfg[k]) - 0.5;
    f.values[k] = cells * mask.resolution;
  }
  return f;
}

bool DistanceField::contains(const Vec2& p) const {
  const Vec2 q = (p - origin) / resolution;
  return q.x() >= 0.0 && q.y() >= 0.0 && q.x() <= width && q.y() <= height;
}

double DistanceField::sample(const Vec2& p) const {
  Vec2 g;
  return sample(p, g);
}

double DistanceField::sample(const Vec2& p, Vec2& gradient) const {
  if (!p.allFinite() || !contains(p)) throw InputError("distance field: point outside the grid");
  // Continuous index relative to cell centers, clamped to the outer centers.
  const double u = std::clamp((p.x() - origin.x()) / resolution - 0.5, 0.0, double(width - 1));
  const double v = std::clamp((p.y() - origin.y()) / resolution - 0.5, 0.0, double(height - 1));
  const int i0 = std::min(static_cast<int>(u), std::max(width - 2, 0));
  const int j0 = std::min(static_cast<int>(v), std::max(height - 2, 0));
  const int i1 = std::min(i0 + 1, width - 1);
  const int j1 = std::min(j0 + 1, height - 1);
  const double a = u - i0, b = v - j0;
  const double f00 = at(i0, j0), f10 = at(i1, j0), f01 = at(i0, j1), f11 = at(i1, j1);
  gradient = Vec2(((1 - b) * (f10 - f00) + b * (f11 - f01)) / resolution,
                  ((1 - a) * (f01 - f00) + a * (f11 - f10)) / resolution);
  return (1 - a) * (1 - b) * f00 + a * (1 - b) * f10 + (1 - a) * b * f01 + a * b * f11;
}

}  // namespace foldopt
