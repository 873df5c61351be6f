#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace rotorxy {

enum class Axis : int { X = 0, Y = 1 };

struct Edge {
  int start;
  int end;
  Axis axis;
};

// Oriented L x L torus. Vertices carry XY spins; edges carry the rotor /
// edge variables. Conventions (fixed, not configurable):
//   - row-major indices: vertex(x,y) = y*L + x, same for faces;
//     x-edges are 0..N-1, y-edges N..2N-1.
//   - every x-edge points +x, every y-edge points +y.
//   - face (x,y) is the plaquette whose lower-left corner is vertex (x,y);
//     eps(e,f) = +1 when the edge orientation matches clockwise circulation
//     around the face (with x to the right and y up).
//   - eps(e,v) = +1 at the start vertex of e, -1 at the end vertex.
//   - loop_x  = the x-edges in row y=0           (primal loop C_x)
//   - loop_y  = the y-edges in column x=0        (primal loop C_y)
//   - cut_y   = the x-edges in column x=0        (dual cut, crossed by the
//               vertical dual loop; twisted bonds carry delta_e = 1)
//   - cut_x   = the y-edges in row y=0           (dual cut, horizontal)
class TorusLattice {
 public:
  explicit TorusLattice(int size);

  int size() const { return size_; }
  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_faces() const { return num_vertices_; }

  int vertex_index(int x, int y) const { return wrap(y) * size_ + wrap(x); }
  int face_index(int x, int y) const { return wrap(y) * size_ + wrap(x); }
  int x_edge_index(int x, int y) const { return wrap(y) * size_ + wrap(x); }
  int y_edge_index(int x, int y) const {
    return num_vertices_ + wrap(y) * size_ + wrap(x);
  }

  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Face-boundary incidence eps(e,f); 0 when e is not on the boundary of f.
  int face_incidence(int e, int f) const;
  // Vertex-star incidence eps(e,v); 0 when e is not incident on v.
  int vertex_incidence(int e, int v) const;

  // The two (face, sign) incidences of edge e.
  const std::array<std::array<int, 2>, 2>& edge_faces(int e) const {
    return edge_faces_[e];
  }
  // The four (edge, sign) pairs bounding face f, and the star of vertex v.
  const std::array<std::array<int, 2>, 4>& face_boundary(int f) const {
    return face_boundary_[f];
  }
  const std::array<std::array<int, 2>, 4>& vertex_star(int v) const {
    return vertex_star_[v];
  }

  const std::vector<int>& loop_x() const { return loop_x_; }
  const std::vector<int>& loop_y() const { return loop_y_; }
  const std::vector<int>& cut_x() const { return cut_x_; }
  const std::vector<int>& cut_y() const { return cut_y_; }

  bool in_loop_x(int e) const { return loop_x_mask_[e]; }
  bool in_loop_y(int e) const { return loop_y_mask_[e]; }
  // Twist indicator delta_e: 1 exactly on the cut_y edges.
  bool twisted(int e) const { return cut_y_mask_[e]; }

  // Copy with one eps(e,f) sign flipped; used to exercise the algebra
  // checker's failure paths.
  TorusLattice with_flipped_face_incidence(int e, int f) const;

 private:
  int wrap(int c) const {
    c %= size_;
    return c < 0 ? c + size_ : c;
  }

  int size_;
  int num_vertices_;
  std::vector<Edge> edges_;
  std::vector<std::array<std::array<int, 2>, 2>> edge_faces_;
  std::vector<std::array<std::array<int, 2>, 4>> face_boundary_;
  std::vector<std::array<std::array<int, 2>, 4>> vertex_star_;
  std::vector<int> loop_x_, loop_y_, cut_x_, cut_y_;
  std::vector<char> loop_x_mask_, loop_y_mask_, cut_y_mask_;
};

// Divergence-free integer currents parametrized by face heights (reference
// face 0 pinned to height 0) plus the two winding numbers:
//   k_e = sum_f eps(e,f) n_f + m [e in C_x] + m' [e in C_y]
struct CurrentConfig {
  std::vector<int> heights;   // per face, heights[0] == 0
  int winding_x = 0;          // m
  int winding_y = 0;          // m'
  std::vector<int> currents;  // k_e per edge
};

// `heights` holds the num_faces()-1 non-reference heights, face order 1..F-1.
CurrentConfig currents_from_heights(const TorusLattice& lat,
                                    std::span<const int> heights, int m,
                                    int m_prime);

// Per-vertex divergence sum_e eps(e,v) k_e; all zeros for a valid config.
std::vector<int> divergence(const TorusLattice& lat,
                            std::span<const int> currents);

struct AlgebraViolation {
  std::string check;  // "commutation", "crossing", "redundancy", ...
  int a = -1;         // vertex (commutation) or edge (redundancy) index
  int b = -1;         // face index where applicable
  std::string detail;
};

struct AlgebraReport {
  bool ok = true;
  std::vector<AlgebraViolation> violations;
  std::string summary() const;
};

// Verifies the stabilizer/logical-operator combinatorics:
//  (a) sum_e eps(e,v) eps(e,f) == 0 for every vertex-face pair,
//  (b) loop/cut crossing pattern |C_x ^ B_y| = |C_y ^ B_x| = 1,
//      |C_x ^ B_x| = |C_y ^ B_y| = 0, with sizes L and pure axes,
//  (c) sum_f eps(e,f) == 0 per edge (the product of all face stabilizers
//      is the identity).
AlgebraReport check_code_algebra(const TorusLattice& lat);

}  // namespace rotorxy
