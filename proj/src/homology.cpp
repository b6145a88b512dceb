#include "uts/homology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "uts/error.hpp"
#include "uts/rng.hpp"

namespace uts {

std::vector<PersistencePair> PersistenceDiagram::in_dim(int dim) const {
    std::vector<PersistencePair> out;
    for (const auto& p : pairs)
        if (p.dim == dim) out.push_back(p);
    return out;
}

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

struct Edge {
    double length;
    int a, b;

    bool operator<(const Edge& o) const {
        if (length != o.length) return length < o.length;
        if (a != o.a) return a < o.a;
        return b < o.b;
    }
};

struct Triangle {
    double diam;
    int a, b, c;

    bool operator<(const Triangle& o) const {
        if (diam != o.diam) return diam < o.diam;
        if (a != o.a) return a < o.a;
        if (b != o.b) return b < o.b;
        return c < o.c;
    }
};

// Adds a sorted column into `work` (symmetric difference mod 2).
void add_column(std::vector<int>& work, const std::vector<int>& other) {
    std::vector<int> merged;
    merged.reserve(work.size() + other.size());
    std::set_symmetric_difference(work.begin(), work.end(), other.begin(),
                                  other.end(), std::back_inserter(merged));
    work = std::move(merged);
}

// Standard left-to-right reduction of one boundary matrix: columns arrive in
// filtration order, rows are indices of (dim-1)-simplices in filtration
// order. Records (pivot row, column id) pairs.
struct Reduction {
    std::vector<int> pivot_owner;              // row -> owning column, -1 if free
    std::vector<std::vector<int>> stored;      // reduced columns that own a pivot
    std::vector<int> stored_pivot;             // pivot row per stored column

    explicit Reduction(std::size_t rows) : pivot_owner(rows, -1) {}

    // Returns the pivot row if the column survives reduction, -1 otherwise.
    int reduce(std::vector<int> column) {
        while (!column.empty()) {
            const int top = column.back();
            const int owner = pivot_owner[static_cast<std::size_t>(top)];
            if (owner < 0) {
                pivot_owner[static_cast<std::size_t>(top)] =
                    static_cast<int>(stored.size());
                stored.push_back(std::move(column));
                stored_pivot.push_back(top);
                return top;
            }
            add_column(column, stored[static_cast<std::size_t>(owner)]);
        }
        return -1;
    }
};

} // namespace

PersistenceDiagram rips_persistence(const DistanceMatrix& dm, int max_dim,
                                    double threshold) {
    if (max_dim < 0 || max_dim > 2)
        fail(ErrorKind::Capability,
             "rips_persistence supports max_dim in {0,1,2}, got " +
                 std::to_string(max_dim));

    const int n = static_cast<int>(dm.size());
    PersistenceDiagram diag;
    if (n < 2) {
        diag.pairs.push_back({0, 0.0, kInfDeath});
        return diag;
    }

    const double diameter = dm.d.maxCoeff();
    if (threshold <= 0.0) threshold = diameter > 0.0 ? diameter : 1.0;

    // --- H0 by union-find over ascending edges ------------------------------
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (dm.d(i, j) <= threshold) edges.push_back({dm.d(i, j), i, j});
    std::sort(edges.begin(), edges.end());

    UnionFind uf(static_cast<std::size_t>(n));
    std::vector<char> edge_positive(edges.size(), 0); // creates a cycle
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (uf.unite(edges[e].a, edges[e].b)) {
            if (edges[e].length > 0.0)
                diag.pairs.push_back({0, 0.0, edges[e].length});
        } else {
            edge_positive[e] = 1;
        }
    }
    int components = 0;
    for (int i = 0; i < n; ++i)
        if (uf.find(i) == i) ++components;
    for (int i = 0; i < components; ++i) diag.pairs.push_back({0, 0.0, kInfDeath});

    if (max_dim == 0) return diag;

    // --- H>=1 by boundary reduction -----------------------------------------
    // The enclosing radius bounds every positive-dimensional feature, so the
    // complex can be truncated there without changing the diagram.
    double complex_threshold = threshold;
    if (threshold >= diameter) {
        double enclosing = diameter;
        for (int i = 0; i < n; ++i) {
            double ecc = 0.0;
            for (int j = 0; j < n; ++j) ecc = std::max(ecc, dm.d(i, j));
            enclosing = std::min(enclosing, ecc);
        }
        complex_threshold = enclosing;
    }

    // Edge ranks restricted to the complex threshold, in filtration order.
    std::vector<int> edge_rank_of(edges.size(), -1);
    std::vector<double> rank_length;
    std::vector<char> rank_positive;
    Eigen::MatrixXi edge_rank(n, n);
    edge_rank.setConstant(-1);
    {
        int rank = 0;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (edges[e].length > complex_threshold) break;
            edge_rank_of[e] = rank;
            edge_rank(edges[e].a, edges[e].b) = rank;
            edge_rank(edges[e].b, edges[e].a) = rank;
            rank_length.push_back(edges[e].length);
            rank_positive.push_back(edge_positive[e]);
            ++rank;
        }
    }
    const std::size_t edge_count = rank_length.size();

    std::vector<Triangle> triangles;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (dm.d(i, j) > complex_threshold) continue;
            for (int k = j + 1; k < n; ++k) {
                const double diam =
                    std::max({dm.d(i, j), dm.d(i, k), dm.d(j, k)});
                if (diam <= complex_threshold) triangles.push_back({diam, i, j, k});
            }
        }
    std::sort(triangles.begin(), triangles.end());

    std::vector<char> triangle_cleared(triangles.size(), 0);

    if (max_dim == 2) {
        // Reduce the tetrahedron boundary first; its pivots are triangles
        // whose columns can then be cleared from the dim-2 reduction.
        // Triangle rank lookup keyed by vertex triple.
        auto tri_key = [n](int a, int b, int c) {
            return (static_cast<long long>(a) * n + b) * n + c;
        };
        std::unordered_map<long long, int> tri_index;
        tri_index.reserve(triangles.size() * 2);
        for (std::size_t t = 0; t < triangles.size(); ++t)
            tri_index[tri_key(triangles[t].a, triangles[t].b, triangles[t].c)] =
                static_cast<int>(t);

        struct Tet {
            double diam;
            int a, b, c, d;
            bool operator<(const Tet& o) const {
                if (diam != o.diam) return diam < o.diam;
                if (a != o.a) return a < o.a;
                if (b != o.b) return b < o.b;
                if (c != o.c) return c < o.c;
                return d < o.d;
            }
        };
        std::vector<Tet> tets;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                if (dm.d(i, j) > complex_threshold) continue;
                for (int k = j + 1; k < n; ++k) {
                    const double dij_k = std::max(
                        {dm.d(i, j), dm.d(i, k), dm.d(j, k)});
                    if (dij_k > complex_threshold) continue;
                    for (int l = k + 1; l < n; ++l) {
                        const double diam = std::max(
                            {dij_k, dm.d(i, l), dm.d(j, l), dm.d(k, l)});
                        if (diam <= complex_threshold)
                            tets.push_back({diam, i, j, k, l});
                    }
                }
            }
        std::sort(tets.begin(), tets.end());

        Reduction red3(triangles.size());
        std::vector<char> tri_positive(triangles.size(), 0);
        for (const auto& tet : tets) {
            std::vector<int> column = {
                tri_index.at(tri_key(tet.b, tet.c, tet.d)),
                tri_index.at(tri_key(tet.a, tet.c, tet.d)),
                tri_index.at(tri_key(tet.a, tet.b, tet.d)),
                tri_index.at(tri_key(tet.a, tet.b, tet.c))};
            std::sort(column.begin(), column.end());
            const int pivot = red3.reduce(std::move(column));
            if (pivot >= 0) {
                triangle_cleared[static_cast<std::size_t>(pivot)] = 1;
                const double birth = triangles[static_cast<std::size_t>(pivot)].diam;
                if (tet.diam > birth) diag.pairs.push_back({2, birth, tet.diam});
            }
        }
    }

    Reduction red2(edge_count);
    std::vector<char> edge_rank_killed(edge_count, 0);
    std::vector<char> triangle_essential(triangles.size(), 0);
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        if (triangle_cleared[t]) continue; // clearing: already paired upward
        const auto& tr = triangles[t];
        std::vector<int> column = {edge_rank(tr.a, tr.b), edge_rank(tr.a, tr.c),
                                   edge_rank(tr.b, tr.c)};
        std::sort(column.begin(), column.end());
        const int pivot = red2.reduce(std::move(column));
        if (pivot >= 0) {
            edge_rank_killed[static_cast<std::size_t>(pivot)] = 1;
            const double birth = rank_length[static_cast<std::size_t>(pivot)];
            if (tr.diam > birth) diag.pairs.push_back({1, birth, tr.diam});
        } else {
            triangle_essential[t] = 1;
        }
    }

    // Positive edges never claimed as a pivot carry essential 1-cycles.
    for (std::size_t r = 0; r < edge_count; ++r)
        if (rank_positive[r] && !edge_rank_killed[r])
            diag.pairs.push_back({1, rank_length[r], kInfDeath});

    if (max_dim == 2) {
        // Positive triangles (zero dim-2 columns) never paired with a
        // tetrahedron carry essential 2-cycles.
        for (std::size_t t = 0; t < triangles.size(); ++t)
            if (triangle_essential[t])
                diag.pairs.push_back({2, triangles[t].diam, kInfDeath});
    }

    std::sort(diag.pairs.begin(), diag.pairs.end(),
              [](const PersistencePair& x, const PersistencePair& y) {
                  if (x.dim != y.dim) return x.dim < y.dim;
                  if (x.birth != y.birth) return x.birth < y.birth;
                  return x.death < y.death;
              });
    return diag;
}

PhStats ph_stats(const PersistenceDiagram& diag, int dim) {
    double lifetime_sum = 0.0;
    double midlife_sum = 0.0;
    std::size_t count = 0;
    for (const auto& p : diag.pairs) {
        if (p.dim != dim || !p.finite()) continue;
        lifetime_sum += p.death - p.birth;
        midlife_sum += (p.birth + p.death) / 2.0;
        ++count;
    }
    if (count == 0)
        fail(ErrorKind::Degenerate,
             "no finite persistence pairs in dimension " + std::to_string(dim));
    return {lifetime_sum / static_cast<double>(count),
            midlife_sum / static_cast<double>(count)};
}

double persistence_entropy(const PersistenceDiagram& diag, int dim) {
    std::vector<double> lifetimes;
    for (const auto& p : diag.pairs)
        if (p.dim == dim && p.finite() && p.lifetime() > 0.0)
            lifetimes.push_back(p.lifetime());
    if (lifetimes.empty())
        fail(ErrorKind::Degenerate,
             "persistence entropy undefined: no positive lifetimes in dimension " +
                 std::to_string(dim));
    const double total = std::accumulate(lifetimes.begin(), lifetimes.end(), 0.0);
    double h = 0.0;
    for (double l : lifetimes) {
        const double p = l / total;
        h -= p * std::log(p);
    }
    return h;
}

double ph_dimension(const PointCloud& cloud, Metric metric, double alpha,
                    const std::vector<std::size_t>& sizes, std::size_t trials,
                    std::uint64_t seed) {
    if (alpha <= 0.0) fail(ErrorKind::Bounds, "alpha must be positive");
    if (sizes.size() < 4)
        fail(ErrorKind::Bounds, "ph_dimension needs at least 4 subset sizes");
    if (trials < 1) fail(ErrorKind::Bounds, "ph_dimension needs trials >= 1");
    const std::size_t n = static_cast<std::size_t>(cloud.rows());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] > n)
            fail(ErrorKind::Bounds, "subset size exceeds cloud size");
        if (i > 0 && sizes[i] <= sizes[i - 1])
            fail(ErrorKind::Bounds, "subset sizes must be strictly ascending");
    }

    std::vector<double> log_n, log_e;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        double mean_e = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const SampleSpec spec{sizes[j], derive_seed(seed, j * trials + t)};
            const PointCloud subset = sample(cloud, spec);
            const DistanceMatrix dm = pairwise_distances(subset, metric);
            const PersistenceDiagram diag = rips_persistence(dm, 0);
            double e = 0.0;
            for (const auto& p : diag.pairs)
                if (p.dim == 0 && p.finite())
                    e += std::pow(p.lifetime(), alpha);
            mean_e += e;
        }
        mean_e /= static_cast<double>(trials);
        if (mean_e <= 0.0)
            fail(ErrorKind::Degenerate,
                 "zero persistence sum at size " + std::to_string(sizes[j]));
        log_n.push_back(std::log(static_cast<double>(sizes[j])));
        log_e.push_back(std::log(mean_e));
    }

    const std::size_t m = log_n.size();
    const double mean_x = std::accumulate(log_n.begin(), log_n.end(), 0.0) / m;
    const double mean_y = std::accumulate(log_e.begin(), log_e.end(), 0.0) / m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxy += (log_n[i] - mean_x) * (log_e[i] - mean_y);
        sxx += (log_n[i] - mean_x) * (log_n[i] - mean_x);
    }
    const double slope = sxy / sxx;
    if (slope >= 1.0)
        fail(ErrorKind::Divergence,
             "persistence growth slope " + std::to_string(slope) +
                 " >= 1, dimension estimate diverges");
    return alpha / (1.0 - slope);
}

BettiProfile betti_numbers(const PersistenceDiagram& diag, int max_dim, double tau) {
    BettiProfile profile;
    profile.tau = tau;
    profile.betti.assign(static_cast<std::size_t>(max_dim) + 1, 0);
    for (const auto& p : diag.pairs) {
        if (p.dim > max_dim) continue;
        if (p.birth <= tau && tau < p.death)
            ++profile.betti[static_cast<std::size_t>(p.dim)];
    }
    return profile;
}

long euler_characteristic(const PersistenceDiagram& diag, double tau) {
    if (tau < 0.0) fail(ErrorKind::Bounds, "tau must be nonnegative");
    long chi = 0;
    for (const auto& p : diag.pairs) {
        if (p.birth <= tau && tau < p.death)
            chi += (p.dim % 2 == 0) ? 1 : -1;
    }
    return chi;
}

std::string diagram_to_csv(const PersistenceDiagram& diag) {
    std::ostringstream out;
    out.precision(17);
    out << "dim,birth,death\n";
    for (const auto& p : diag.pairs) {
        out << p.dim << ',' << p.birth << ',';
        if (p.finite())
            out << p.death;
        else
            out << "inf";
        out << '\n';
    }
    return out.str();
}

PersistenceDiagram diagram_from_csv(const std::string& text) {
    PersistenceDiagram diag;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("dim,", 0) == 0) continue;
        }
        std::istringstream row(line);
        std::string dim_s, birth_s, death_s;
        if (!std::getline(row, dim_s, ',') || !std::getline(row, birth_s, ',') ||
            !std::getline(row, death_s))
            fail(ErrorKind::Parse, "malformed diagram row: " + line);
        PersistencePair p;
        p.dim = std::stoi(dim_s);
        p.birth = std::stod(birth_s);
        p.death = death_s == "inf" ? kInfDeath : std::stod(death_s);
        diag.pairs.push_back(p);
    }
    return diag;
}

} // namespace uts
