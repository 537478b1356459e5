#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "qpsl2/config.hpp"
#include "qpsl2/errors.hpp"
#include "qpsl2/mat2.hpp"
#include "qpsl2/sl2.hpp"
#include "qpsl2/trig_poly.hpp"

// Maps T -> SL(2,R) held as closed-form expression trees, evaluable at any
// real argument, with lazily cached equispaced samples for grid work.
// Node kinds: const, rot_path, exp_trig, schrodinger, product, inverse,
// shift, conj (pointwise b m b^{-1}).

namespace qpsl2 {

class Sl2Map {
  public:
    enum class Kind { kConst, kRotPath, kExpTrig, kSchrodinger, kProduct, kInverse, kShift, kConj };

    Sl2Map() : Sl2Map(constant(Mat2R::identity())) {}

    static Sl2Map constant(const Mat2R& m) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::kConst;
        n->constant = m;
        return Sl2Map(std::move(n));
    }

    // theta -> R(2 pi r theta); integer r is E_r, half-integer r has period 2.
    static Sl2Map rot_path(double r) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::kRotPath;
        n->rot_r = r;
        n->period = (r == std::floor(r)) ? 1 : 2;
        return Sl2Map(std::move(n));
    }

    static Sl2Map exp_trig(const Sl2TrigPoly& p) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::kExpTrig;
        n->trig = p;
        return Sl2Map(std::move(n));
    }

    // [[V(theta) - shift, 1],[-1, 0]]
    static Sl2Map schrodinger(const TrigPolyC& potential, double energy_shift) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::kSchrodinger;
        n->potential = potential;
        n->energy_shift = energy_shift;
        return Sl2Map(std::move(n));
    }

    static Sl2Map product(const Sl2Map& lhs, const Sl2Map& rhs) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::kProduct;
        n->child1 = lhs.node_;
        n->child2 = rhs.node_;
        n->period = std::max(lhs.period(), rhs.period());
        return Sl2Map(std::move(n));
    }

    static Sl2Map inverse(const Sl2Map& m) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::kInverse;
        n->child1 = m.node_;
        n->period = m.period();
        return Sl2Map(std::move(n));
    }

    static Sl2Map shift(const Sl2Map& m, double c) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::kShift;
        n->child1 = m.node_;
        n->shift_c = c;
        n->period = m.period();
        return Sl2Map(std::move(n));
    }

    // pointwise b(theta) m(theta) b(theta)^{-1}
    static Sl2Map conj(const Sl2Map& b, const Sl2Map& m) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::kConj;
        n->child1 = b.node_;
        n->child2 = m.node_;
        n->period = std::max(b.period(), m.period());
        return Sl2Map(std::move(n));
    }

    int period() const { return node_->period; }
    Kind kind() const { return node_->kind; }

    Mat2R eval(double theta) const { return eval_node(*node_, theta); }
    Mat2R operator()(double theta) const { return eval(theta); }

    // 4th-order central finite difference; the tree is analytic in theta.
    Mat2R derivative(double theta, double h = 5e-5) const {
        const Mat2R p1 = eval(theta + h), m1 = eval(theta - h);
        const Mat2R p2 = eval(theta + 2 * h), m2 = eval(theta - 2 * h);
        return ((p1 - m1) * 8.0 - (p2 - m2)) * (1.0 / (12.0 * h));
    }

    // Cached samples at N equispaced points of [0, period); N a power of two.
    // Samples are renormalized to det 1; a sample drifting beyond the grid
    // tolerance before renormalization throws.
    const std::vector<Mat2R>& grid(int n = scheme().grid_default) const {
        if (n <= 0 || (n & (n - 1)) != 0)
            throw Error(Errc::config_invalid, "grid size must be a power of two");
        auto it = node_->grids.find(n);
        if (it != node_->grids.end()) return it->second;
        std::vector<Mat2R> g(static_cast<std::size_t>(n));
        const double p = static_cast<double>(period());
        for (int j = 0; j < n; ++j) {
            Mat2R m = eval(p * static_cast<double>(j) / static_cast<double>(n));
            if (std::fabs(m.det() - 1.0) > 1e-6)
                throw Error(Errc::not_unimodular, "cached sample far from det 1");
            g[static_cast<std::size_t>(j)] = m.renormalized();
        }
        return node_->grids.emplace(n, std::move(g)).first->second;
    }

    double grid_det_defect(int n = scheme().grid_default) const {
        double worst = 0;
        const double p = static_cast<double>(period());
        for (int j = 0; j < n; ++j) {
            const Mat2R m = eval(p * static_cast<double>(j) / static_cast<double>(n));
            worst = std::max(worst, std::fabs(m.det() - 1.0));
        }
        return worst;
    }

    nlohmann::json to_json() const { return node_to_json(*node_); }
    static Sl2Map from_json(const nlohmann::json& j) { return Sl2Map(node_from_json(j)); }

  private:
    struct Node {
        Kind kind = Kind::kConst;
        Mat2R constant;
        double rot_r = 0;
        Sl2TrigPoly trig;
        TrigPolyC potential;
        double energy_shift = 0;
        double shift_c = 0;
        std::shared_ptr<const Node> child1, child2;
        int period = 1;
        mutable std::unordered_map<int, std::vector<Mat2R>> grids;
    };

    explicit Sl2Map(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    explicit Sl2Map(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    static Mat2R eval_node(const Node& n, double theta) {
        switch (n.kind) {
            case Kind::kConst:
                return n.constant;
            case Kind::kRotPath:
                return Mat2R::rotation(kTwoPi * n.rot_r * theta);
            case Kind::kExpTrig:
                return exp_traceless(n.trig.eval(theta).matrix());
            case Kind::kSchrodinger: {
                const double v = n.potential.eval_real(theta) - n.energy_shift;
                return {v, 1.0, -1.0, 0.0};
            }
            case Kind::kProduct:
                return eval_node(*n.child1, theta) * eval_node(*n.child2, theta);
            case Kind::kInverse:
                return eval_node(*n.child1, theta).inverse();
            case Kind::kShift:
                return eval_node(*n.child1, theta + n.shift_c);
            case Kind::kConj: {
                const Mat2R b = eval_node(*n.child1, theta);
                return b * eval_node(*n.child2, theta) * b.inverse();
            }
        }
        return Mat2R::identity();
    }

    static nlohmann::json poly_to_json(const TrigPolyC& p) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& [k, c] : p.coeffs())
            out.push_back({k, c.real(), c.imag()});
        return out;
    }

    static TrigPolyC poly_from_json(const nlohmann::json& j) {
        TrigPolyC p;
        for (const auto& t : j) p.add(t.at(0).get<long long>(), cplx(t.at(1), t.at(2)));
        return p;
    }

    // Matrix-valued Fourier data as (k, 4 reals): the traceless coefficient
    // matrix M_k multiplies cos(2 pi k theta) for k >= 0 and sin(2 pi |k| theta)
    // for k < 0.
    static nlohmann::json sl2poly_to_json(const Sl2TrigPoly& p) {
        std::map<long long, AlgebraVector> cosa, sina;
        auto split = [&](const TrigPolyC& comp, double AlgebraVector::*field) {
            for (const auto& [k, c] : comp.coeffs()) {
                if (k == 0) {
                    cosa[0].*field += c.real();
                } else if (k > 0) {
                    cosa[k].*field += 2.0 * c.real();
                    sina[k].*field += -2.0 * c.imag();
                }
            }
        };
        split(p.x, &AlgebraVector::x);
        split(p.y, &AlgebraVector::y);
        split(p.z, &AlgebraVector::z);
        nlohmann::json out = nlohmann::json::array();
        auto emit = [&out](long long k, const AlgebraVector& v) {
            const Mat2R m = v.matrix();
            out.push_back({k, m.a, m.b, m.c, m.d});
        };
        for (const auto& [k, v] : cosa) emit(k, v);
        for (const auto& [k, v] : sina) emit(-k, v);
        return out;
    }

    static Sl2TrigPoly sl2poly_from_json(const nlohmann::json& j) {
        Sl2TrigPoly p;
        for (const auto& t : j) {
            const long long k = t.at(0).get<long long>();
            const Mat2R m{t.at(1), t.at(2), t.at(3), t.at(4)};
            const AlgebraVector v = algebra_from_matrix(m);
            if (k == 0) {
                p.x.add(0, v.x);
                p.y.add(0, v.y);
                p.z.add(0, v.z);
            } else if (k > 0) {
                p.x = p.x + TrigPolyC::cosine(static_cast<int>(k), v.x);
                p.y = p.y + TrigPolyC::cosine(static_cast<int>(k), v.y);
                p.z = p.z + TrigPolyC::cosine(static_cast<int>(k), v.z);
            } else {
                p.x = p.x + TrigPolyC::sine(static_cast<int>(-k), v.x);
                p.y = p.y + TrigPolyC::sine(static_cast<int>(-k), v.y);
                p.z = p.z + TrigPolyC::sine(static_cast<int>(-k), v.z);
            }
        }
        return p;
    }

    static nlohmann::json node_to_json(const Node& n) {
        nlohmann::json j;
        switch (n.kind) {
            case Kind::kConst:
                j["kind"] = "const";
                j["m"] = {n.constant.a, n.constant.b, n.constant.c, n.constant.d};
                break;
            case Kind::kRotPath:
                j["kind"] = "rot_path";
                j["r"] = n.rot_r;
                break;
            case Kind::kExpTrig:
                j["kind"] = "exp_trig";
                j["fourier"] = sl2poly_to_json(n.trig);
                break;
            case Kind::kSchrodinger:
                j["kind"] = "schrodinger";
                j["potential"] = poly_to_json(n.potential);
                j["energy_shift"] = n.energy_shift;
                break;
            case Kind::kProduct:
                j["kind"] = "product";
                j["lhs"] = node_to_json(*n.child1);
                j["rhs"] = node_to_json(*n.child2);
                break;
            case Kind::kInverse:
                j["kind"] = "inverse";
                j["arg"] = node_to_json(*n.child1);
                break;
            case Kind::kShift:
                j["kind"] = "shift";
                j["c"] = n.shift_c;
                j["arg"] = node_to_json(*n.child1);
                break;
            case Kind::kConj:
                j["kind"] = "conj";
                j["by"] = node_to_json(*n.child1);
                j["arg"] = node_to_json(*n.child2);
                break;
        }
        return j;
    }

    static std::shared_ptr<const Node> node_from_json(const nlohmann::json& j) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "const") {
            const auto& m = j.at("m");
            return Sl2Map::constant(Mat2R{m.at(0), m.at(1), m.at(2), m.at(3)}).node_;
        }
        if (kind == "rot_path") return rot_path(j.at("r").get<double>()).node_;
        if (kind == "exp_trig") return exp_trig(sl2poly_from_json(j.at("fourier"))).node_;
        if (kind == "schrodinger")
            return schrodinger(poly_from_json(j.at("potential")),
                               j.value("energy_shift", 0.0)).node_;
        if (kind == "product")
            return product(Sl2Map(node_from_json(j.at("lhs"))), Sl2Map(node_from_json(j.at("rhs"))))
                .node_;
        if (kind == "inverse") return inverse(Sl2Map(node_from_json(j.at("arg")))).node_;
        if (kind == "shift")
            return shift(Sl2Map(node_from_json(j.at("arg"))), j.at("c").get<double>()).node_;
        if (kind == "conj")
            return conj(Sl2Map(node_from_json(j.at("by"))), Sl2Map(node_from_json(j.at("arg"))))
                .node_;
        throw Error(Errc::config_invalid, "unknown map node kind: " + kind);
    }

    std::shared_ptr<const Node> node_;
};

}  // namespace qpsl2
