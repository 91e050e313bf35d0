#include "leakscope/cfg.hpp"

#include <sstream>

#include "leakscope/errors.hpp"

namespace leakscope {

namespace {

class Builder {
 public:
  explicit Builder(const PreparedProgram& p) : p_(p) {}

  Cfg run() {
    for (const auto& d : p_.decls) {
      cfg_.slot_of[d.name] = static_cast<int>(cfg_.slot_names.size());
      cfg_.slot_names.push_back(d.name);
    }
    cfg_.program = &p_;

    CfgNode ret;
    ret.kind = CfgNode::Kind::Return;
    cfg_.exit_node = add(std::move(ret));

    // Build backwards so every statement knows its successor.
    int next = cfg_.exit_node;
    std::vector<int> entries(p_.body.size() + 1);
    entries[p_.body.size()] = next;
    for (std::size_t k = p_.body.size(); k-- > 0;) {
      next = build_stmt(*p_.body[k], next);
      entries[k] = next;
    }
    cfg_.entry = next;
    cfg_.top_level_entry = std::move(entries);

    for (std::size_t i = 0; i < cfg_.nodes.size(); ++i) {
      if (cfg_.nodes[i].next >= 0)
        cfg_.nodes[cfg_.nodes[i].next].preds.push_back(static_cast<int>(i));
      if (cfg_.nodes[i].next_else >= 0)
        cfg_.nodes[cfg_.nodes[i].next_else].preds.push_back(static_cast<int>(i));
    }
    return std::move(cfg_);
  }

 private:
  int add(CfgNode n) {
    cfg_.nodes.push_back(std::move(n));
    return static_cast<int>(cfg_.nodes.size() - 1);
  }

  int build_block(const Block& b, int next) {
    for (std::size_t k = b.size(); k-- > 0;) next = build_stmt(*b[k], next);
    return next;
  }

  int build_stmt(const Stmt& s, int next) {
    switch (s.kind) {
      case Stmt::Kind::Assign: {
        CfgNode n;
        n.kind = CfgNode::Kind::Assign;
        n.pos = s.pos;
        n.value = s.value.get();
        if (s.index) {
          n.array_target = &s.target;
          n.target_index = s.index.get();
        } else {
          auto it = cfg_.slot_of.find(s.target);
          if (it == cfg_.slot_of.end())
            throw AnalysisError("undeclared assignment target '" + s.target + "'");
          n.target_slot = it->second;
        }
        n.next = next;
        return add(std::move(n));
      }
      case Stmt::Kind::If: {
        // elseif chain built back to front
        int else_entry = s.else_block.empty() ? next
                                              : build_block(s.else_block, next);
        for (std::size_t k = s.elifs.size(); k-- > 0;) {
          CfgNode br;
          br.kind = CfgNode::Kind::Branch;
          br.pos = s.pos;
          br.cond = s.elifs[k].first.get();
          br.next = build_block(s.elifs[k].second, next);
          br.next_else = else_entry;
          else_entry = add(std::move(br));
        }
        CfgNode br;
        br.kind = CfgNode::Kind::Branch;
        br.pos = s.pos;
        br.cond = s.cond.get();
        br.next = build_block(s.then_block, next);
        br.next_else = else_entry;
        return add(std::move(br));
      }
      case Stmt::Kind::While: {
        CfgNode br;
        br.kind = CfgNode::Kind::Branch;
        br.pos = s.pos;
        br.cond = s.cond.get();
        br.next_else = next;
        const int head = add(std::move(br));
        cfg_.nodes[head].next = build_block(s.body, head);
        return head;
      }
      case Stmt::Kind::Return: {
        CfgNode n;
        n.kind = CfgNode::Kind::Return;
        n.pos = s.pos;
        return add(std::move(n));
      }
      case Stmt::Kind::Simulate:
      case Stmt::Kind::SimulateAbs: {
        CfgNode n;
        n.kind = s.kind == Stmt::Kind::Simulate ? CfgNode::Kind::Simulate
                                                : CfgNode::Kind::SimulateAbs;
        n.pos = s.pos;
        n.next = next;
        return add(std::move(n));
      }
      case Stmt::Kind::For:
      case Stmt::Kind::ForEach:
        throw AnalysisError("loops must be unrolled before CFG construction");
    }
    throw AnalysisError("unreachable statement kind");
  }

  const PreparedProgram& p_;
  Cfg cfg_;
};

std::string node_label(const Cfg& cfg, const CfgNode& n) {
  switch (n.kind) {
    case CfgNode::Kind::Assign: {
      std::string target =
          n.target_slot >= 0
              ? cfg.slot_names[static_cast<std::size_t>(n.target_slot)]
              : *n.array_target + "[" + print_expr(*n.target_index) + "]";
      return target + " := " + print_expr(*n.value);
    }
    case CfgNode::Kind::Branch:
      return "if " + print_expr(*n.cond);
    case CfgNode::Kind::Return:
      return "return";
    case CfgNode::Kind::Simulate:
      return "simulate";
    case CfgNode::Kind::SimulateAbs:
      return "simulate-abs";
  }
  return "?";
}

}  // namespace

Cfg build_cfg(const PreparedProgram& p) { return Builder(p).run(); }

void write_cfg_dot(std::ostream& os, const Cfg& cfg) {
  os << "digraph cfg {\n  node [shape=box fontname=\"monospace\"];\n";
  for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
    const CfgNode& n = cfg.nodes[i];
    std::string label = node_label(cfg, n);
    for (std::size_t k = 0; k < label.size(); ++k)
      if (label[k] == '"') label[k] = '\'';
    os << "  n" << i << " [label=\"" << label << '"';
    if (n.kind == CfgNode::Kind::Branch) os << " shape=diamond";
    if (n.kind == CfgNode::Kind::Simulate ||
        n.kind == CfgNode::Kind::SimulateAbs)
      os << " style=filled fillcolor=red fontcolor=white";
    os << "];\n";
  }
  for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
    const CfgNode& n = cfg.nodes[i];
    if (n.kind == CfgNode::Kind::Branch) {
      os << "  n" << i << " -> n" << n.next << " [label=\"T\"];\n";
      os << "  n" << i << " -> n" << n.next_else << " [label=\"F\"];\n";
    } else if (n.next >= 0) {
      os << "  n" << i << " -> n" << n.next << ";\n";
    }
  }
  os << "}\n";
}

std::string cfg_to_dot(const Cfg& cfg) {
  std::ostringstream os;
  write_cfg_dot(os, cfg);
  return os.str();
}

}  // namespace leakscope
