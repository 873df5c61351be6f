#include "rotorxy/lattice.hpp"

#include <sstream>
#include <stdexcept>

namespace rotorxy {

TorusLattice::TorusLattice(int size) : size_(size) {
  if (size < 2) {
    throw std::invalid_argument(
        "TorusLattice: size must be >= 2 (size 1 gives self-loops and "
        "degenerate faces)");
  }
  num_vertices_ = size * size;
  const int n = num_vertices_;
  edges_.resize(2 * n);
  edge_faces_.resize(2 * n);
  face_boundary_.resize(n);
  vertex_star_.resize(n);

  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int ex = x_edge_index(x, y);
      edges_[ex] = {vertex_index(x, y), vertex_index(x + 1, y), Axis::X};
      // top edge of face (x,y-1), bottom edge of face (x,y)
      edge_faces_[ex] = {{{face_index(x, y - 1), +1}, {face_index(x, y), -1}}};

      const int ey = y_edge_index(x, y);
      edges_[ey] = {vertex_index(x, y), vertex_index(x, y + 1), Axis::Y};
      // left edge of face (x,y), right edge of face (x-1,y)
      edge_faces_[ey] = {{{face_index(x, y), +1}, {face_index(x - 1, y), -1}}};
    }
  }

  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int f = face_index(x, y);
      face_boundary_[f] = {{{y_edge_index(x, y), +1},
                            {x_edge_index(x, y + 1), +1},
                            {y_edge_index(x + 1, y), -1},
                            {x_edge_index(x, y), -1}}};
      const int v = vertex_index(x, y);
      vertex_star_[v] = {{{x_edge_index(x, y), +1},
                          {y_edge_index(x, y), +1},
                          {x_edge_index(x - 1, y), -1},
                          {y_edge_index(x, y - 1), -1}}};
    }
  }

  loop_x_mask_.assign(2 * n, 0);
  loop_y_mask_.assign(2 * n, 0);
  cut_y_mask_.assign(2 * n, 0);
  for (int x = 0; x < size; ++x) {
    loop_x_.push_back(x_edge_index(x, 0));
    cut_x_.push_back(y_edge_index(x, 0));
    loop_x_mask_[x_edge_index(x, 0)] = 1;
  }
  for (int y = 0; y < size; ++y) {
    loop_y_.push_back(y_edge_index(0, y));
    cut_y_.push_back(x_edge_index(0, y));
    loop_y_mask_[y_edge_index(0, y)] = 1;
    cut_y_mask_[x_edge_index(0, y)] = 1;
  }
}

int TorusLattice::face_incidence(int e, int f) const {
  for (const auto& [fi, sign] : edge_faces_[e]) {
    if (fi == f) return sign;
  }
  return 0;
}

int TorusLattice::vertex_incidence(int e, int v) const {
  const Edge& ed = edges_[e];
  // start and end are distinct for size >= 2
  if (ed.start == v) return +1;
  if (ed.end == v) return -1;
  return 0;
}

TorusLattice TorusLattice::with_flipped_face_incidence(int e, int f) const {
  TorusLattice out = *this;
  bool found = false;
  for (auto& [fi, sign] : out.edge_faces_[e]) {
    if (fi == f) {
      sign = -sign;
      found = true;
    }
  }
  if (!found) {
    throw std::invalid_argument("with_flipped_face_incidence: edge " +
                                std::to_string(e) + " is not on face " +
                                std::to_string(f));
  }
  for (auto& [ei, sign] : out.face_boundary_[f]) {
    if (ei == e) sign = -sign;
  }
  return out;
}

CurrentConfig currents_from_heights(const TorusLattice& lat,
                                    std::span<const int> heights, int m,
                                    int m_prime) {
  const int f_count = lat.num_faces();
  if (static_cast<int>(heights.size()) != f_count - 1) {
    throw std::invalid_argument(
        "currents_from_heights: expected " + std::to_string(f_count - 1) +
        " non-reference heights, got " + std::to_string(heights.size()));
  }
  CurrentConfig cfg;
  cfg.heights.resize(f_count, 0);
  for (int f = 1; f < f_count; ++f) cfg.heights[f] = heights[f - 1];
  cfg.winding_x = m;
  cfg.winding_y = m_prime;
  cfg.currents.assign(lat.num_edges(), 0);
  for (int e = 0; e < lat.num_edges(); ++e) {
    int k = 0;
    for (const auto& [f, sign] : lat.edge_faces(e)) k += sign * cfg.heights[f];
    if (lat.in_loop_x(e)) k += m;
    if (lat.in_loop_y(e)) k += m_prime;
    cfg.currents[e] = k;
  }
  return cfg;
}

std::vector<int> divergence(const TorusLattice& lat,
                            std::span<const int> currents) {
  std::vector<int> div(lat.num_vertices(), 0);
  for (int v = 0; v < lat.num_vertices(); ++v) {
    int s = 0;
    for (const auto& [e, sign] : lat.vertex_star(v)) s += sign * currents[e];
    div[v] = s;
  }
  return div;
}

std::string AlgebraReport::summary() const {
  if (ok) return "all stabilizer/logical-operator checks passed";
  std::ostringstream os;
  os << violations.size() << " violation(s):";
  for (const auto& v : violations) {
    os << "\n  [" << v.check << "]";
    if (v.a >= 0) os << " a=" << v.a;
    if (v.b >= 0) os << " b=" << v.b;
    if (!v.detail.empty()) os << " " << v.detail;
  }
  return os.str();
}

AlgebraReport check_code_algebra(const TorusLattice& lat) {
  AlgebraReport rep;
  const int L = lat.size();

  // (a) vertex-face commutation: sum_e eps(e,v) eps(e,f) = 0. Only faces
  // touching the star of v can contribute, but the full scan is cheap at the
  // sizes this runs at and catches arbitrary corruption.
  for (int v = 0; v < lat.num_vertices(); ++v) {
    for (int f = 0; f < lat.num_faces(); ++f) {
      int s = 0;
      for (const auto& [e, sv] : lat.vertex_star(v)) {
        s += sv * lat.face_incidence(e, f);
      }
      if (s != 0) {
        rep.violations.push_back(
            {"commutation", v, f, "sum = " + std::to_string(s)});
      }
    }
  }

  // (b) loop/cut crossing pattern.
  auto count_common = [](const std::vector<int>& a, const std::vector<int>& b) {
    int c = 0;
    for (int e : a)
      for (int e2 : b)
        if (e == e2) ++c;
    return c;
  };
  auto check_count = [&](const char* name, int got, int want) {
    if (got != want) {
      rep.violations.push_back(
          {"crossing", -1, -1,
       std::string(name) + ": got " + std::to_string(got) + ", want " +
               std::to_string(want)});
    }
  };
  check_count("|C_x|", static_cast<int>(lat.loop_x().size()), L);
  check_count("|C_y|", static_cast<int>(lat.loop_y().size()), L);
  check_count("|B_x|", static_cast<int>(lat.cut_x().size()), L);
  check_count("|B_y|", static_cast<int>(lat.cut_y().size()), L);
  check_count("|C_x ^ B_y|", count_common(lat.loop_x(), lat.cut_y()), 1);
  check_count("|C_y ^ B_x|", count_common(lat.loop_y(), lat.cut_x()), 1);
  check_count("|C_x ^ B_x|", count_common(lat.loop_x(), lat.cut_x()), 0);
  check_count("|C_y ^ B_y|", count_common(lat.loop_y(), lat.cut_y()), 0);
  for (int e : lat.loop_x()) {
    if (lat.edge(e).axis != Axis::X)
      rep.violations.push_back({"crossing", e, -1, "C_x edge not x-axis"});
  }
  for (int e : lat.cut_y()) {
    if (lat.edge(e).axis != Axis::X)
      rep.violations.push_back({"crossing", e, -1, "B_y edge not x-axis"});
  }

  // (c) stabilizer redundancy: the signed sum of all face boundaries is the
  // zero chain, i.e. every edge sees its two faces with opposite signs.
  for (int e = 0; e < lat.num_edges(); ++e) {
    int s = 0;
    for (const auto& [f, sign] : lat.edge_faces(e)) {
      (void)f;
      s += sign;
    }
    if (s != 0) {
      rep.violations.push_back(
          {"redundancy", e, -1, "sum_f eps(e,f) = " + std::to_string(s)});
    }
  }

  rep.ok = rep.violations.empty();
  return rep;
}

}  // namespace rotorxy
