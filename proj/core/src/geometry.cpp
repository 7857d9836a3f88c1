#include "hicon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

namespace hicon::geometry {

namespace {

double cross(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cdd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cdd - bd * cdy) - ady * (bdx * cdd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

double wrap_angle(double a) {
  while (a <= -kPi) a += 2 * kPi;
  while (a > kPi) a -= 2 * kPi;
  return a;
}

struct Builder {
  std::vector<Vec2> pts;
  std::vector<Triangle> tris;
  Vec2 c;

  int add(const Vec2& p) {
    pts.push_back(p);
    return static_cast<int>(pts.size()) - 1;
  }

  void add_tri(int a, int b, int d, Region r) {
    if (cross(pts[a], pts[b], pts[d]) < 0) std::swap(b, d);
    if (cross(pts[a], pts[b], pts[d]) <= 0) throw GeometryError("zipper produced a degenerate triangle");
    tris.push_back({{a, b, d}, r});
  }

  double angle(int v) const { return std::atan2(pts[v].y() - c.y(), pts[v].x() - c.x()); }

  // Triangulates the band between two nested closed rings, both counterclockwise.
  void zipper(const std::vector<int>& outer, const std::vector<int>& inner, Region r) {
    const int na = static_cast<int>(outer.size());
    const int nb = static_cast<int>(inner.size());
    std::vector<double> ua(na + 1), ub(nb + 1);
    ua[0] = angle(outer[0]);
    for (int i = 1; i <= na; ++i) {
      double d = wrap_angle(angle(outer[i % na]) - angle(outer[i - 1]));
      if (d <= 0) d += 2 * kPi;
      ua[i] = ua[i - 1] + d;
    }
    int j0 = 0;
    double best = 1e300;
    for (int j = 0; j < nb; ++j) {
      const double d = std::abs(wrap_angle(angle(inner[j]) - ua[0]));
      if (d < best - 1e-14) {
        best = d;
        j0 = j;
      }
    }
    ub[0] = ua[0] + wrap_angle(angle(inner[j0]) - ua[0]);
    for (int j = 1; j <= nb; ++j) {
      double d = wrap_angle(angle(inner[(j0 + j) % nb]) - angle(inner[(j0 + j - 1) % nb]));
      if (d <= 0) d += 2 * kPi;
      ub[j] = ub[j - 1] + d;
    }
    auto A = [&](int i) { return outer[i % na]; };
    auto B = [&](int j) { return inner[(j0 + j) % nb]; };
    int i = 0, j = 0;
    while (i < na || j < nb) {
      bool adv_a;
      if (i == na) adv_a = false;
      else if (j == nb) adv_a = true;
      else adv_a = ua[i + 1] < ub[j + 1];
      if (adv_a) {
        add_tri(A(i), A(i + 1), B(j), r);
        ++i;
      } else {
        add_tri(A(i), B(j + 1), B(j), r);
        ++j;
      }
    }
  }

  void fan(int center, const std::vector<int>& ring, Region r) {
    const int n = static_cast<int>(ring.size());
    for (int k = 0; k < n; ++k) add_tri(center, ring[k], ring[(k + 1) % n], r);
  }
};

// Ray distance from c to the boundary of [0,P]^2 along angle phi.
double ray_to_square(const Vec2& c, double phi, double P) {
  const double dx = std::cos(phi), dy = std::sin(phi);
  double t = 1e300;
  if (dx > 1e-15) t = std::min(t, (P - c.x()) / dx);
  if (dx < -1e-15) t = std::min(t, -c.x() / dx);
  if (dy > 1e-15) t = std::min(t, (P - c.y()) / dy);
  if (dy < -1e-15) t = std::min(t, -c.y() / dy);
  return t;
}

// Point on the square boundary at counterclockwise arclength s from the corner (0,0).
Vec2 square_point(double s, double P) {
  const double L = 4 * P;
  s = std::fmod(s, L);
  if (s < 0) s += L;
  if (s < P) return {s, 0};
  if (s < 2 * P) return {P, s - P};
  if (s < 3 * P) return {3 * P - s, P};
  return {0, 4 * P - s};
}

double square_arclength(const Vec2& p, double P) {
  const double e = 1e-12 * P;
  if (std::abs(p.y()) < e) return p.x();
  if (std::abs(p.x() - P) < e) return P + p.y();
  if (std::abs(p.y() - P) < e) return 3 * P - p.x();
  return 4 * P - p.y();
}

int lawson_flips(Builder& b, const std::vector<std::pair<int, int>>& constrained) {
  std::map<std::pair<int, int>, int> fixed;
  for (auto [u, v] : constrained) fixed[{std::min(u, v), std::max(u, v)}] = 1;
  int total = 0;
  for (int pass = 0; pass < 200; ++pass) {
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edges;
    for (int t = 0; t < static_cast<int>(b.tris.size()); ++t)
      for (int k = 0; k < 3; ++k) {
        const int u = b.tris[t].v[k], v = b.tris[t].v[(k + 1) % 3];
        edges[{std::min(u, v), std::max(u, v)}].push_back({t, (k + 2) % 3});
      }
    std::vector<char> touched(b.tris.size(), 0);
    int flips = 0;
    for (auto& [key, adj] : edges) {
      if (adj.size() != 2 || fixed.count(key)) continue;
      const int t1 = adj[0].first, t2 = adj[1].first;
      if (touched[t1] || touched[t2]) continue;
      if (b.tris[t1].region != b.tris[t2].region) continue;
      const int r = b.tris[t1].v[adj[0].second];
      const int s = b.tris[t2].v[adj[1].second];
      // t1 = (p, q, r) counterclockwise with shared edge (p, q).
      const int k1 = adj[0].second;
      const int p = b.tris[t1].v[(k1 + 1) % 3], q = b.tris[t1].v[(k1 + 2) % 3];
      const auto& P = b.pts;
      const double scale = (P[p] - P[q]).squaredNorm();
      if (incircle(P[p], P[q], P[r], P[s]) <= 1e-10 * scale * scale) continue;
      if (cross(P[r], P[p], P[s]) <= 1e-14 * scale || cross(P[r], P[s], P[q]) <= 1e-14 * scale) continue;
      const Region reg = b.tris[t1].region;
      b.tris[t1] = {{r, p, s}, reg};
      b.tris[t2] = {{r, s, q}, reg};
      touched[t1] = touched[t2] = 1;
      ++flips;
    }
    total += flips;
    if (flips == 0) break;
  }
  return total;
}

std::vector<int> make_ring(Builder& b, double radius, int n, double offset) {
  std::vector<int> ring(n);
  for (int k = 0; k < n; ++k) {
    const double phi = 2 * kPi * (k + offset) / n;
    ring[k] = b.add(b.c + radius * Vec2(std::cos(phi), std::sin(phi)));
  }
  return ring;
}

}  // namespace

const char* region_name(Region r) {
  switch (r) {
    case Region::StiffInt: return "stiff-int";
    case Region::Soft: return "soft";
    case Region::StiffLs: return "stiff-ls";
  }
  return "?";
}

const char* interface_name(Interface g) { return g == Interface::Int ? "int" : "ls"; }

void validate_spec(const CellSpec& s) {
  const double P = s.period;
  if (!(P > 0)) throw GeometryError("period must be positive");
  if (!(s.r_in > 0) || !(s.r_in < s.r_out)) throw GeometryError("radii must satisfy 0 < r_in < r_out");
  if (s.n_bnd < 16 || s.n_bnd % 2 != 0) throw GeometryError("n_bnd must be an even integer >= 16");
  if (!(s.h > 0)) throw GeometryError("h must be positive");
  const double gap =
      std::min({s.center.x(), P - s.center.x(), s.center.y(), P - s.center.y()}) - s.r_out;
  if (gap < s.gap_min * P) throw GeometryError("outer circle too close to the cell boundary (gap_min violated)");
  const double chord = 2 * s.r_in * std::sin(kPi / s.n_bnd);
  if (chord > 2 * s.h) throw GeometryError("n_bnd too coarse to resolve r_in at mesh size h");
}

PeriodCellMesh build_period_cell(const CellSpec& spec) {
  validate_spec(spec);
  const double P = spec.period;
  const int n = spec.n_bnd;
  Builder b;
  b.c = spec.center;

  // Stiff-interior disc: rings shrinking towards the center, spacing growing towards h.
  std::vector<int> gamma_int = make_ring(b, spec.r_in, n, 0.0);
  {
    std::vector<int> ring = gamma_int;
    double r = spec.r_in;
    double s = 2 * r * std::sin(kPi / n);
    int k = 0;
    while (true) {
      const double s_next = std::min(spec.h, 1.2 * s);
      const double r_next = r - 0.866 * 0.5 * (s + s_next);
      if (r_next <= 0.75 * s_next) break;
      const int n_next = std::max(6, static_cast<int>(std::lround(2 * kPi * r_next / s_next)));
      ++k;
      std::vector<int> inner = make_ring(b, r_next, n_next, 0.5 * (k % 2));
      b.zipper(ring, inner, Region::StiffInt);
      ring = std::move(inner);
      r = r_next;
      s = 2 * kPi * r / n_next;
    }
    const int center = b.add(b.c);
    b.fan(center, ring, Region::StiffInt);
  }

  // Soft annulus: rings with n vertices each, geometric radii.
  std::vector<int> gamma_ls;
  {
    const double q = 1 + kPi * std::sqrt(3.0) / n;
    const int m = std::max(1, static_cast<int>(std::lround(std::log(spec.r_out / spec.r_in) / std::log(q))));
    std::vector<int> ring = gamma_int;
    for (int k = 1; k <= m; ++k) {
      const double rk = k == m ? spec.r_out : spec.r_in * std::pow(spec.r_out / spec.r_in, double(k) / m);
      std::vector<int> outer = make_ring(b, rk, n, 0.5 * (k % 2));
      b.zipper(outer, ring, Region::Soft);
      ring = std::move(outer);
    }
    gamma_ls = ring;
  }

  // Stiff landscape: rings morphing from Γ_ls to ∂Q.
  const int ne = std::max(4, static_cast<int>(std::ceil(P / spec.h - 1e-9)));
  std::vector<int> square(4 * ne);
  std::vector<std::pair<int, int>> slaves;
  {
    auto coord = [&](int i) { return P * static_cast<double>(i) / ne; };
    int idx = 0;
    const int c00 = b.add({0, 0});
    square[idx++] = c00;
    std::vector<int> bottom(ne + 1), right(ne + 1), top(ne + 1), left(ne + 1);
    bottom[0] = left[0] = c00;
    for (int i = 1; i < ne; ++i) square[idx++] = bottom[i] = b.add({coord(i), 0});
    const int c10 = b.add({P, 0});
    square[idx++] = c10;
    bottom[ne] = right[0] = c10;
    for (int j = 1; j < ne; ++j) square[idx++] = right[j] = b.add({P, coord(j)});
    const int c11 = b.add({P, P});
    square[idx++] = c11;
    right[ne] = top[ne] = c11;
    for (int i = ne - 1; i >= 1; --i) square[idx++] = top[i] = b.add({coord(i), P});
    const int c01 = b.add({0, P});
    square[idx++] = c01;
    top[0] = left[ne] = c01;
    for (int j = ne - 1; j >= 1; --j) square[idx++] = left[j] = b.add({0, coord(j)});

    slaves = {{c10, c00}, {c11, c00}, {c01, c00}};
    for (int j = 1; j < ne; ++j) slaves.push_back({right[j], left[j]});
    for (int i = 1; i < ne; ++i) slaves.push_back({top[i], bottom[i]});

    const Vec2 c = spec.center;
    const double g_side = std::min({c.x(), P - c.x(), c.y(), P - c.y()}) - spec.r_out;
    const double s_circ = 2 * spec.r_out * std::sin(kPi / n);
    const double s_sq = P / ne;
    const int nr = std::max(1, static_cast<int>(std::lround(g_side / (0.866 * 0.5 * (s_circ + s_sq)))));
    const double start_len = square_arclength(c + ray_to_square(c, 0.0, P) * Vec2(1, 0), P);
    auto phi_square = [&](double u) {
      const Vec2 p = square_point(start_len + 4 * P * u, P);
      double a = std::atan2(p.y() - c.y(), p.x() - c.x());
      if (u > 0.5 && a < 0) a += 2 * kPi;
      if (u > 0.75 && a < kPi) a += 2 * kPi;
      if (u < 0.25 && a > kPi) a -= 2 * kPi;
      return a;
    };
    std::vector<int> ring = gamma_ls;
    for (int j = 1; j < nr; ++j) {
      const double t = double(j) / nr;
      const int nj = static_cast<int>(std::lround(n + (4 * ne - n) * t));
      std::vector<int> mid(nj);
      for (int k = 0; k < nj; ++k) {
        const double u = (k + 0.5 * (j % 2)) / nj;
        const double phi = (1 - t) * (2 * kPi * u) + t * phi_square(u);
        const double rho = spec.r_out + t * (ray_to_square(c, phi, P) - spec.r_out);
        mid[k] = b.add(c + rho * Vec2(std::cos(phi), std::sin(phi)));
      }
      b.zipper(mid, ring, Region::StiffLs);
      ring = std::move(mid);
    }
    b.zipper(square, ring, Region::StiffLs);
  }
  std::vector<int> periodic(b.pts.size());
  for (size_t v = 0; v < periodic.size(); ++v) periodic[v] = static_cast<int>(v);
  for (auto [sv, mv] : slaves) periodic[sv] = mv;

  std::vector<std::pair<int, int>> constrained;
  for (const auto* loop : {&gamma_int, &gamma_ls})
    for (size_t k = 0; k < loop->size(); ++k) constrained.push_back({(*loop)[k], (*loop)[(k + 1) % loop->size()]});
  lawson_flips(b, constrained);

  PeriodCellMesh mesh;
  mesh.spec = spec;
  mesh.vertices = std::move(b.pts);
  mesh.triangles = std::move(b.tris);
  mesh.interface_loops = {gamma_int, gamma_ls};
  for (int g = 0; g < 2; ++g) {
    const auto& loop = mesh.interface_loops[g];
    for (size_t k = 0; k < loop.size(); ++k) mesh.interface_edges[g].push_back({loop[k], loop[(k + 1) % loop.size()]});
  }
  mesh.periodic_map = std::move(periodic);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.periodic_map[v] == v) mesh.free_dofs.push_back(v);
  mesh.boundary_vertices = square;
  std::sort(mesh.boundary_vertices.begin(), mesh.boundary_vertices.end());

  const std::string err = check_mesh(mesh);
  if (!err.empty()) throw GeometryError("mesh check failed: " + err);
  const double ang = min_angle_deg(mesh);
  if (ang < spec.min_angle_deg) {
    std::ostringstream os;
    os << "minimum angle " << ang << " below floor " << spec.min_angle_deg;
    throw GeometryError(os.str());
  }
  return mesh;
}

const std::vector<int>& trace_space(const PeriodCellMesh& mesh, Interface which) {
  return mesh.interface_loops[static_cast<int>(which)];
}

PeriodCellMesh scaled(const PeriodCellMesh& mesh, double s) {
  PeriodCellMesh out = mesh;
  for (auto& p : out.vertices) p *= s;
  out.spec.center *= s;
  out.spec.r_in *= s;
  out.spec.r_out *= s;
  out.spec.h *= s;
  out.spec.period *= s;
  return out;
}

double triangle_area(const PeriodCellMesh& mesh, const Triangle& t) {
  return 0.5 * cross(mesh.vertices[t.v[0]], mesh.vertices[t.v[1]], mesh.vertices[t.v[2]]);
}

double region_area(const PeriodCellMesh& mesh, Region r) {
  double a = 0;
  for (const auto& t : mesh.triangles)
    if (t.region == r) a += triangle_area(mesh, t);
  return a;
}

double interface_length(const PeriodCellMesh& mesh, Interface g) {
  double L = 0;
  for (const auto& e : mesh.interface_edges[static_cast<int>(g)])
    L += (mesh.vertices[e[0]] - mesh.vertices[e[1]]).norm();
  return L;
}

double min_angle_deg(const PeriodCellMesh& mesh) {
  double amin = 180;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const Vec2 a = mesh.vertices[t.v[k]];
      const Vec2 u = mesh.vertices[t.v[(k + 1) % 3]] - a;
      const Vec2 w = mesh.vertices[t.v[(k + 2) % 3]] - a;
      const double ang = std::acos(std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0));
      amin = std::min(amin, ang * 180 / kPi);
    }
  return amin;
}

std::string check_mesh(const PeriodCellMesh& mesh) {
  const double P = mesh.spec.period;
  std::ostringstream os;
  for (size_t t = 0; t < mesh.triangles.size(); ++t)
    if (triangle_area(mesh, mesh.triangles[t]) <= 0) {
      os << "triangle " << t << " has non-positive area";
      return os.str();
    }
  std::map<std::pair<int, int>, std::vector<Region>> edges;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int u = t.v[k], v = t.v[(k + 1) % 3];
      edges[{std::min(u, v), std::max(u, v)}].push_back(t.region);
    }
  std::vector<char> on_bnd(mesh.vertices.size(), 0);
  for (int v : mesh.boundary_vertices) on_bnd[v] = 1;
  for (const auto& [e, regs] : edges) {
    if (regs.size() > 2) return "edge shared by more than two triangles";
    if (regs.size() == 1 && !(on_bnd[e.first] && on_bnd[e.second])) return "open edge away from the cell boundary";
  }
  for (int g = 0; g < 2; ++g) {
    const Region stiff = g == 0 ? Region::StiffInt : Region::StiffLs;
    for (const auto& ie : mesh.interface_edges[g]) {
      auto it = edges.find({std::min(ie[0], ie[1]), std::max(ie[0], ie[1])});
      if (it == edges.end() || it->second.size() != 2) return "interface edge not shared by two triangles";
      const auto& regs = it->second;
      const bool ok = (regs[0] == Region::Soft && regs[1] == stiff) || (regs[1] == Region::Soft && regs[0] == stiff);
      if (!ok) return "interface edge does not separate soft from the adjacent stiff region";
    }
  }
  // Region tags must not touch across non-interface edges.
  for (const auto& [e, regs] : edges)
    if (regs.size() == 2 && regs[0] != regs[1]) {
      bool is_iface = false;
      for (int g = 0; g < 2 && !is_iface; ++g)
        for (const auto& ie : mesh.interface_edges[g])
          if (std::min(ie[0], ie[1]) == e.first && std::max(ie[0], ie[1]) == e.second) is_iface = true;
      if (!is_iface) return "regions meet across a non-interface edge";
    }
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const int m = mesh.periodic_map[v];
    if (mesh.periodic_map[m] != m) return "periodic map is not idempotent";
    if (m == v) continue;
    const Vec2 d = mesh.vertices[v] - mesh.vertices[m];
    const bool okx = d.x() == 0 || d.x() == P;
    const bool oky = d.y() == 0 || d.y() == P;
    if (!okx || !oky || (d.x() == 0 && d.y() == 0)) return "periodic partner is not a lattice translate";
  }
  double total = 0;
  for (Region r : kRegions) total += region_area(mesh, r);
  if (std::abs(total - P * P) > 1e-12 * P * P) return "region areas do not sum to the cell area";
  return {};
}

std::string to_json(const PeriodCellMesh& mesh) {
  nlohmann::ordered_json j;
  const auto& s = mesh.spec;
  j["spec"] = {{"center", {s.center.x(), s.center.y()}}, {"r_in", s.r_in},   {"r_out", s.r_out},
               {"h", s.h},                                {"n_bnd", s.n_bnd}, {"period", s.period},
               {"gap_min", s.gap_min},                    {"min_angle_deg", s.min_angle_deg}};
  auto& V = j["vertices"] = nlohmann::ordered_json::array();
  for (const auto& p : mesh.vertices) V.push_back({p.x(), p.y()});
  auto& T = j["triangles"] = nlohmann::ordered_json::array();
  for (const auto& t : mesh.triangles) T.push_back({t.v[0], t.v[1], t.v[2], static_cast<int>(t.region)});
  j["interface_loops"] = {{"int", mesh.interface_loops[0]}, {"ls", mesh.interface_loops[1]}};
  j["periodic_map"] = mesh.periodic_map;
  j["boundary_vertices"] = mesh.boundary_vertices;
  return j.dump(1);
}

PeriodCellMesh from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  PeriodCellMesh mesh;
  const auto& s = j.at("spec");
  mesh.spec.center = {s.at("center")[0].get<double>(), s.at("center")[1].get<double>()};
  mesh.spec.r_in = s.at("r_in");
  mesh.spec.r_out = s.at("r_out");
  mesh.spec.h = s.at("h");
  mesh.spec.n_bnd = s.at("n_bnd");
  mesh.spec.period = s.at("period");
  mesh.spec.gap_min = s.at("gap_min");
  mesh.spec.min_angle_deg = s.at("min_angle_deg");
  for (const auto& p : j.at("vertices")) mesh.vertices.push_back({p[0].get<double>(), p[1].get<double>()});
  for (const auto& t : j.at("triangles"))
    mesh.triangles.push_back({{t[0].get<int>(), t[1].get<int>(), t[2].get<int>()}, static_cast<Region>(t[3].get<int>())});
  mesh.interface_loops[0] = j.at("interface_loops").at("int").get<std::vector<int>>();
  mesh.interface_loops[1] = j.at("interface_loops").at("ls").get<std::vector<int>>();
  for (int g = 0; g < 2; ++g) {
    const auto& loop = mesh.interface_loops[g];
    for (size_t k = 0; k < loop.size(); ++k) mesh.interface_edges[g].push_back({loop[k], loop[(k + 1) % loop.size()]});
  }
  mesh.periodic_map = j.at("periodic_map").get<std::vector<int>>();
  mesh.boundary_vertices = j.at("boundary_vertices").get<std::vector<int>>();
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.periodic_map[v] == v) mesh.free_dofs.push_back(v);
  const std::string err = check_mesh(mesh);
  if (!err.empty()) throw GeometryError("imported mesh invalid: " + err);
  return mesh;
}

}  // namespace hicon::geometry
