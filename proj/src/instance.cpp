#include "unifl/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "unifl/rng.hpp"

namespace unifl {

double UniflInstance::mean_degree() const {
    if (n == 0) return 0.0;
    std::size_t total = 0;
    for (const auto& a : adj) total += a.size() - 1;  // exclude self-loop
    return static_cast<double>(total) / n;
}

static void sort_adjacency(UniflInstance& inst) {
    for (auto& list : inst.adj) {
        std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) {
            return std::tie(a.dist, a.id) < std::tie(b.dist, b.id);
        });
    }
}

UniflInstance build_instance(int n, const std::vector<Edge>& edges) {
    if (n < 1) throw InvariantViolation("vertex count must be at least 1");
    UniflInstance inst;
    inst.n = n;
    inst.adj.resize(n);
    for (int v = 0; v < n; ++v) inst.adj[v].push_back({v, 0.0});

    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges) {
        if (e.u < 0 || e.u >= n) throw VertexOutOfRange(e.u);
        if (e.v < 0 || e.v >= n) throw VertexOutOfRange(e.v);
        if (e.w < 0.0) throw NegativeDistance(e.u, e.v, e.w);
        auto key = std::minmax(e.u, e.v);
        if (!seen.insert({key.first, key.second}).second) throw DuplicateEdge(e.u, e.v);
        if (e.u == e.v) throw DuplicateEdge(e.u, e.v);  // self-loops are implicit
        if (e.w > 1.0) continue;
        inst.adj[e.u].push_back({e.v, e.w});
        inst.adj[e.v].push_back({e.u, e.w});
    }
    sort_adjacency(inst);
    return inst;
}

static void validate_config(const GeneratorConfig& cfg) {
    if (cfg.n < 1 || cfg.dim < 1 || cfg.components < 1 || cfg.component_std <= 0.0 ||
        cfg.domain_scale <= 0.0)
        throw InvariantViolation("invalid generator config");
}

UniflInstance generate_geometric(const GeneratorConfig& cfg) {
    validate_config(cfg);
    SplitMix64 rng(cfg.seed);

    std::vector<std::vector<double>> centroids(cfg.components, std::vector<double>(cfg.dim));
    for (auto& c : centroids)
        for (double& x : c) x = rng.next_uniform() * cfg.domain_scale;

    std::vector<std::vector<double>> pts(cfg.n, std::vector<double>(cfg.dim));
    for (auto& p : pts) {
        int comp = static_cast<int>(rng.next_uniform() * cfg.components);
        if (comp == cfg.components) comp = cfg.components - 1;
        for (int d = 0; d < cfg.dim; ++d)
            p[d] = centroids[comp][d] + cfg.component_std * rng.next_gaussian();
    }

    std::vector<Edge> edges;
    for (int u = 0; u < cfg.n; ++u) {
        for (int v = u + 1; v < cfg.n; ++v) {
            double s = 0.0;
            for (int d = 0; d < cfg.dim; ++d) {
                double diff = pts[u][d] - pts[v][d];
                s += diff * diff;
            }
            double dist = std::sqrt(s);
            if (dist <= 1.0) edges.push_back({u, v, dist});
        }
    }

    UniflInstance inst = build_instance(cfg.n, edges);
    inst.coords = std::move(pts);
    inst.dim = cfg.dim;
    inst.id = "geo-n" + std::to_string(cfg.n) + "-d" + std::to_string(cfg.dim) + "-s" +
              std::to_string(cfg.seed);
    return inst;
}

void check_invariants(const UniflInstance& inst) {
    if (static_cast<int>(inst.adj.size()) != inst.n)
        throw InvariantViolation("adjacency size mismatch");
    std::set<std::tuple<int, int, double>> directed;
    for (int v = 0; v < inst.n; ++v) {
        const auto& list = inst.adj[v];
        int self_count = 0;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& nb = list[i];
            if (nb.id < 0 || nb.id >= inst.n) throw InvariantViolation("neighbor id out of range");
            if (nb.dist < 0.0 || nb.dist > 1.0)
                throw InvariantViolation("stored distance outside [0,1]");
            if (nb.id == v) {
                if (nb.dist != 0.0) throw InvariantViolation("self-loop with nonzero distance");
                ++self_count;
            }
            if (i > 0) {
                const auto& prev = list[i - 1];
                if (std::tie(prev.dist, prev.id) >= std::tie(nb.dist, nb.id))
                    throw InvariantViolation("adjacency not strictly sorted by (distance, id)");
            }
            if (nb.id != v) directed.insert({v, nb.id, nb.dist});
        }
        if (self_count != 1) throw InvariantViolation("missing or repeated self-loop");
    }
    for (const auto& [u, v, w] : directed)
        if (!directed.count({v, u, w})) throw InvariantViolation("asymmetric edge");

    if (inst.has_coords()) {
        if (static_cast<int>(inst.coords.size()) != inst.n)
            throw InvariantViolation("coordinate count mismatch");
        for (const auto& [u, v, w] : directed) {
            double s = 0.0;
            for (int d = 0; d < inst.dim; ++d) {
                double diff = inst.coords[u][d] - inst.coords[v][d];
                s += diff * diff;
            }
            if (std::abs(std::sqrt(s) - w) > 1e-12)
                throw InvariantViolation("edge weight disagrees with coordinates");
        }
    }
}

static std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void save_instance(const UniflInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "unifl v1 " << inst.n << "\n";
    for (int u = 0; u < inst.n; ++u)
        for (const auto& nb : inst.adj[u])
            if (nb.id > u) out << u << " " << nb.id << " " << fmt_double(nb.dist) << "\n";
    if (inst.has_coords()) {
        out << "coords " << inst.dim << "\n";
        for (const auto& p : inst.coords) {
            for (int d = 0; d < inst.dim; ++d) out << (d ? " " : "") << fmt_double(p[d]);
            out << "\n";
        }
    }
    if (!out) throw IoError("write failure on " + path);
}

UniflInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    int lineno = 0;

    if (!std::getline(in, line)) throw ParseError(1, "empty file");
    ++lineno;
    std::istringstream header(line);
    std::string magic, version;
    int n = 0;
    if (!(header >> magic >> version >> n) || magic != "unifl" || version != "v1" || n < 1)
        throw ParseError(lineno, "bad header, expected 'unifl v1 <n>'");

    std::vector<Edge> edges;
    int dim = 0;
    bool in_coords = false;
    std::vector<std::vector<double>> coords;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (!in_coords) {
            std::string first;
            ls >> first;
            if (first == "coords") {
                if (!(ls >> dim) || dim < 1) throw ParseError(lineno, "bad coords header");
                in_coords = true;
                continue;
            }
            int u, v;
            double w;
            std::istringstream es(line);
            if (!(es >> u >> v >> w)) throw ParseError(lineno, "expected '<u> <v> <w>'");
            std::string rest;
            if (es >> rest) throw ParseError(lineno, "trailing tokens on edge line");
            edges.push_back({u, v, w});
        } else {
            std::vector<double> p(dim);
            for (int d = 0; d < dim; ++d)
                if (!(ls >> p[d])) throw ParseError(lineno, "expected " + std::to_string(dim) + " coordinates");
            coords.push_back(std::move(p));
        }
    }
    if (in_coords && static_cast<int>(coords.size()) != n)
        throw ParseError(lineno, "coordinate line count does not match n");

    UniflInstance inst = build_instance(n, edges);
    if (in_coords) {
        inst.coords = std::move(coords);
        inst.dim = dim;
    }
    inst.id = std::filesystem::path(path).stem().string();
    check_invariants(inst);
    return inst;
}

}  // namespace unifl
