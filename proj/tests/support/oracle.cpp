#include "oracle.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

namespace {

using leakscope::Block;
using leakscope::Expr;
using leakscope::Init;
using leakscope::PreparedProgram;
using leakscope::Stmt;
using leakscope::VarClass;

struct Interp {
  const PreparedProgram& p;
  Tally tally;
  std::vector<std::size_t> secret_slots;
  std::vector<std::size_t> observable_slots;
  std::map<std::string, std::size_t> slot;

  using Env = std::vector<std::int64_t>;
  using Cont = std::function<void(Env&, Rational)>;

  void eval(const Expr& e, Env& env, Rational prob,
            const std::function<void(std::int64_t, Env&, Rational)>& k) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        k(e.value, env, prob);
        return;
      case Expr::Kind::Var:
        k(env[slot.at(e.name)], env, prob);
        return;
      case Expr::Kind::ArrayRef:
        eval(*e.index, env, prob,
             [&](std::int64_t i, Env& env2, Rational pr) {
               const auto& elems = p.arrays.at(e.name);
               k(env2[slot.at(elems.at(static_cast<std::size_t>(i)))], env2,
                 pr);
             });
        return;
      case Expr::Kind::Unary:
        eval(*e.lhs, env, prob, [&](std::int64_t v, Env& env2, Rational pr) {
          k(e.un_op == leakscope::UnOp::Neg ? -v : (v == 0 ? 1 : 0), env2, pr);
        });
        return;
      case Expr::Kind::Binary:
        eval(*e.lhs, env, prob, [&](std::int64_t a, Env& env2, Rational pr) {
          if (e.bin_op == leakscope::BinOp::And && a == 0) {
            k(0, env2, pr);
            return;
          }
          if (e.bin_op == leakscope::BinOp::Or && a != 0) {
            k(1, env2, pr);
            return;
          }
          eval(*e.rhs, env2, pr, [&](std::int64_t b, Env& env3, Rational pr2) {
            k(apply(e.bin_op, a, b), env3, pr2);
          });
        });
        return;
      case Expr::Kind::Random:
        eval(*e.lhs, env, prob, [&](std::int64_t lo, Env& env2, Rational pr) {
          eval(*e.rhs, env2, pr, [&](std::int64_t hi, Env& env3, Rational pr2) {
            if (lo > hi) throw std::runtime_error("empty random range");
            const Rational each = pr2 / Rational(hi - lo + 1);
            for (std::int64_t v = lo; v <= hi; ++v) k(v, env3, each);
          });
        });
        return;
      case Expr::Kind::RandomBit:
        if (e.prob > 0) k(1, env, prob * e.prob);
        if (e.prob < 1) k(0, env, prob * (Rational(1) - e.prob));
        return;
    }
  }

  static std::int64_t apply(leakscope::BinOp op, std::int64_t a,
                            std::int64_t b) {
    using leakscope::BinOp;
    switch (op) {
      case BinOp::Add: return a + b;
      case BinOp::Sub: return a - b;
      case BinOp::Mul: return a * b;
      case BinOp::Div: return a / b;
      case BinOp::Mod: return a % b;
      case BinOp::Xor: return a ^ b;
      case BinOp::Eq: return a == b;
      case BinOp::Ne: return a != b;
      case BinOp::Lt: return a < b;
      case BinOp::Le: return a <= b;
      case BinOp::Gt: return a > b;
      case BinOp::Ge: return a >= b;
      case BinOp::And: return (a != 0 && b != 0) ? 1 : 0;
      case BinOp::Or: return (a != 0 || b != 0) ? 1 : 0;
    }
    return 0;
  }

  // Executes the statement list `b` from index `i`; `after` continues with
  // the enclosing block (or records the outcome at the end of the program).
  void exec(const Block& b, std::size_t i, Env& env, Rational prob,
            const Cont& after) {
    if (i == b.size()) {
      after(env, prob);
      return;
    }
    const Stmt& s = *b[i];
    const Cont next = [&, i](Env& env2, Rational pr) {
      exec(b, i + 1, env2, pr, after);
    };
    switch (s.kind) {
      case Stmt::Kind::Assign:
        eval(*s.value, env, prob, [&](std::int64_t v, Env& env2, Rational pr) {
          if (s.index) {
            eval(*s.index, env2, pr,
                 [&](std::int64_t idx, Env& env3, Rational pr2) {
                   Env forked = env3;
                   forked[slot.at(p.arrays.at(s.target).at(
                       static_cast<std::size_t>(idx)))] = v;
                   next(forked, pr2);
                 });
          } else {
            Env forked = env2;
            forked[slot.at(s.target)] = v;
            next(forked, pr);
          }
        });
        return;
      case Stmt::Kind::If:
        eval(*s.cond, env, prob, [&](std::int64_t c, Env& env2, Rational pr) {
          if (c != 0) {
            exec(s.then_block, 0, env2, pr, next);
            return;
          }
          run_elifs(s, 0, env2, pr, next);
        });
        return;
      case Stmt::Kind::While:
        eval(*s.cond, env, prob, [&](std::int64_t c, Env& env2, Rational pr) {
          if (c == 0) {
            next(env2, pr);
            return;
          }
          const Cont again = [&](Env& env3, Rational pr2) {
            exec(b, i, env3, pr2, after);  // re-test the condition
          };
          exec(s.body, 0, env2, pr, again);
        });
        return;
      case Stmt::Kind::Return:
        record(env, prob);
        return;
      case Stmt::Kind::Simulate:
      case Stmt::Kind::SimulateAbs:
        next(env, prob);  // annotations are transparent to the oracle
        return;
      default:
        throw std::runtime_error("oracle: unexpected statement kind");
    }
  }

  void run_elifs(const Stmt& s, std::size_t j, Env& env, Rational prob,
                 const Cont& next) {
    if (j == s.elifs.size()) {
      exec(s.else_block, 0, env, prob, next);
      return;
    }
    eval(*s.elifs[j].first, env, prob,
         [&](std::int64_t c, Env& env2, Rational pr) {
           if (c != 0)
             exec(s.elifs[j].second, 0, env2, pr, next);
           else
             run_elifs(s, j + 1, env2, pr, next);
         });
  }

  void record(Env& env, Rational prob) {
    std::vector<std::int64_t> x, y;
    for (std::size_t sidx : secret_slots) x.push_back(env[sidx]);
    for (std::size_t oidx : observable_slots) y.push_back(env[oidx]);
    tally[{std::move(x), std::move(y)}] += prob;
  }

  void init_and_run(std::size_t decl_index, Env& env, Rational prob) {
    if (decl_index == p.decls.size()) {
      const Cont done = [&](Env& env2, Rational pr) { record(env2, pr); };
      exec(p.body, 0, env, prob, done);
      return;
    }
    const auto& d = p.decls[decl_index];
    if (d.init.kind == Init::Kind::Literal) {
      env[decl_index] = d.init.literal->value;
      init_and_run(decl_index + 1, env, prob);
      return;
    }
    const std::int64_t lo = d.init.lo->value, hi = d.init.hi->value;
    const Rational each = prob / Rational(hi - lo + 1);
    for (std::int64_t v = lo; v <= hi; ++v) {
      env[decl_index] = v;
      init_and_run(decl_index + 1, env, each);
    }
  }
};

}  // namespace

Tally brute_force(const PreparedProgram& p) {
  Interp interp{p, {}, {}, {}, {}};
  for (std::size_t i = 0; i < p.decls.size(); ++i) {
    const auto& d = p.decls[i];
    interp.slot[d.name] = i;
    if (d.cls == VarClass::Secret) interp.secret_slots.push_back(i);
    if (d.cls == VarClass::Observable) interp.observable_slots.push_back(i);
  }
  Interp::Env env(p.decls.size(), 0);
  interp.init_and_run(0, env, Rational(1));
  return std::move(interp.tally);
}

double tally_mutual_information(const Tally& t) {
  std::map<std::vector<std::int64_t>, long double> px, py;
  for (const auto& [cell, pr] : t) {
    const long double p = static_cast<long double>(leakscope::to_double(pr));
    px[cell.first] += p;
    py[cell.second] += p;
  }
  long double mi = 0.0L, comp = 0.0L;
  for (const auto& [cell, pr] : t) {
    const long double p = static_cast<long double>(leakscope::to_double(pr));
    if (p <= 0.0L) continue;
    const long double term =
        p * std::log2(p / (px[cell.first] * py[cell.second]));
    const long double y = term - comp;
    const long double s = mi + y;
    comp = (s - mi) - y;
    mi = s;
  }
  return static_cast<double>(mi);
}

double tally_entropy_x(const Tally& t) {
  std::map<std::vector<std::int64_t>, long double> px;
  for (const auto& [cell, pr] : t)
    px[cell.first] += static_cast<long double>(leakscope::to_double(pr));
  long double h = 0.0L;
  for (const auto& [x, p] : px)
    if (p > 0.0L) h -= p * std::log2(p);
  return static_cast<double>(h);
}

double matrix_mutual_information(const leakscope::JointDistribution& j) {
  std::vector<long double> px(j.nx(), 0.0L), py(j.ny(), 0.0L);
  for (std::size_t ix = 0; ix < j.nx(); ++ix)
    for (std::size_t iy = 0; iy < j.ny(); ++iy) {
      px[ix] += static_cast<long double>(j.pxy(ix, iy));
      py[iy] += static_cast<long double>(j.pxy(ix, iy));
    }
  long double mi = 0.0L, comp = 0.0L;
  for (std::size_t ix = 0; ix < j.nx(); ++ix)
    for (std::size_t iy = 0; iy < j.ny(); ++iy) {
      const long double p = static_cast<long double>(j.pxy(ix, iy));
      if (p <= 0.0L) continue;
      const long double term = p * std::log2(p / (px[ix] * py[iy]));
      const long double y = term - comp;
      const long double s = mi + y;
      comp = (s - mi) - y;
      mi = s;
    }
  return static_cast<double>(mi);
}

ThreeComponentFixture three_component_fixture() {
  ThreeComponentFixture f;
  f.d1 = {{{0, 0}, 0.3}, {{0, 1}, 0.2}, {{1, 0}, 0.2}, {{1, 1}, 0.3}};
  for (leakscope::Value x = 0; x < 4; ++x) {
    f.d2[{x, 2}] = 0.125;
    f.d2[{x, 3}] = 0.125;
  }
  f.exact_t = {{{2, 0}, Rational(1, 5)}, {{3, 1}, Rational(3, 20)}};
  return f;
}

leakscope::JointDistribution ThreeComponentFixture::true_joint() {
  leakscope::ValueDomain dom({0, 1, 2, 3}, {0, 1, 2, 3});
  std::vector<double> cells(16, 0.0);
  auto add = [&](leakscope::Value x, leakscope::Value y, double v) {
    cells[dom.secret_index(x) * 4 + dom.observable_index(y)] += v;
  };
  for (const auto& [cell, v] : d1) add(cell.first, cell.second, theta1 * v);
  for (const auto& [cell, v] : d2) add(cell.first, cell.second, theta2 * v);
  for (const auto& [cell, v] : exact_t)
    add(cell.first, cell.second, leakscope::to_double(v));
  return leakscope::JointDistribution(dom, std::move(cells));
}

}  // namespace oracle
