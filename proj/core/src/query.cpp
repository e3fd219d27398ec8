#include "gdl/query.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "fact_store.hpp"
#include "lexer.hpp"
#include "summation.hpp"

namespace gdl {

std::string_view to_string(AggFn fn) {
  switch (fn) {
    case AggFn::Avg: return "AVG";
    case AggFn::Sum: return "SUM";
    case AggFn::Count: return "COUNT";
    case AggFn::Min: return "MIN";
    case AggFn::Max: return "MAX";
  }
  return "COUNT";
}

QueryPlan::QueryPlan(std::shared_ptr<const PlanNode> root, std::shared_ptr<const Schema> input,
                     std::string output_relation)
    : root_(std::move(root)), input_(std::move(input)), output_relation_(std::move(output_relation)) {
  RelationSchema rel{output_relation_, {}, RelationKind::Extensional};
  for (const auto& c : root_->columns) rel.attrs.push_back({c.name, c.type});
  auto schema = std::make_shared<Schema>();
  try {
    schema->add(std::move(rel));
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidQuery, e.detail());
  }
  output_ = std::move(schema);
}

std::vector<std::string> QueryPlan::input_relations() const {
  std::set<std::string> out;
  std::vector<const PlanNode*> stack{root_.get()};
  while (!stack.empty()) {
    const PlanNode* n = stack.back();
    stack.pop_back();
    if (n->kind == PlanNode::Kind::Scan) out.insert(n->relation);
    for (const auto& c : n->children) stack.push_back(c.get());
  }
  return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

using detail::Tok;
using detail::Token;
using detail::TokenCursor;

struct ColRef {
  std::string qualifier;
  std::string name;
  SourcePos pos;

  std::string text() const { return qualifier.empty() ? name : qualifier + "." + name; }
};

struct SelectItem {
  enum class Kind { Star, Column, Agg } kind = Kind::Column;
  ColRef col;
  AggFn fn = AggFn::Count;
  bool count_star = false;
  std::string alias;
  SourcePos pos;
};

struct Operand {
  bool is_col = false;
  ColRef col;
  Value literal;
};

struct CondAst {
  Operand left;
  Cmp cmp = Cmp::Eq;
  Operand right;
  SourcePos pos;
};

struct FromItem {
  std::string relation;
  std::string alias;
  SourcePos pos;
};

struct SelectAst {
  std::vector<SelectItem> items;
  std::string into;
  SourcePos into_pos;
  std::vector<FromItem> from;
  std::vector<CondAst> where;
  std::vector<ColRef> group_by;
  bool has_group_by = false;
};

const std::set<std::string> kReserved = {"select", "from", "where", "group", "by", "and",
                                         "union", "as", "into", "true", "false"};

bool is_reserved(const Token& t) {
  if (t.kind != Tok::Ident) return false;
  std::string lower = t.text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return kReserved.contains(lower);
}

std::optional<AggFn> agg_from_name(const std::string& name) {
  std::string u = name;
  std::transform(u.begin(), u.end(), u.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (u == "AVG") return AggFn::Avg;
  if (u == "SUM") return AggFn::Sum;
  if (u == "COUNT") return AggFn::Count;
  if (u == "MIN") return AggFn::Min;
  if (u == "MAX") return AggFn::Max;
  return std::nullopt;
}

class QueryParser {
 public:
  explicit QueryParser(std::string_view text)
      : cur_(detail::tokenize(text, detail::LexOptions{"--", '\''})) {}

  std::vector<SelectAst> parse() {
    std::vector<SelectAst> out;
    out.push_back(select());
    while (cur_.accept_keyword("union")) out.push_back(select());
    cur_.accept_punct(";");
    if (!cur_.at_end()) cur_.fail({"UNION", "';'", "end of input"});
    return out;
  }

 private:
  SelectAst select() {
    SelectAst s;
    cur_.expect_keyword("select");
    s.items.push_back(item());
    while (cur_.accept_punct(",")) s.items.push_back(item());
    if (cur_.is_keyword("into")) {
      s.into_pos = cur_.next().pos;
      s.into = name("relation name");
    }
    cur_.expect_keyword("from");
    s.from.push_back(from_item());
    while (cur_.accept_punct(",")) s.from.push_back(from_item());
    if (cur_.accept_keyword("where")) {
      s.where.push_back(condition());
      while (cur_.accept_keyword("and")) s.where.push_back(condition());
    }
    if (cur_.accept_keyword("group")) {
      cur_.expect_keyword("by");
      s.has_group_by = true;
      s.group_by.push_back(column());
      while (cur_.accept_punct(",")) s.group_by.push_back(column());
    }
    return s;
  }

  std::string name(std::string_view what) {
    const Token& t = cur_.peek();
    if (t.kind != Tok::Ident || is_reserved(t)) cur_.fail({std::string(what)});
    cur_.next();
    return t.text;
  }

  SelectItem item() {
    SelectItem it;
    it.pos = cur_.peek().pos;
    if (cur_.accept_punct("*")) {
      it.kind = SelectItem::Kind::Star;
      return it;
    }
    const Token& t = cur_.peek();
    auto agg = t.kind == Tok::Ident ? agg_from_name(t.text) : std::nullopt;
    if (agg && cur_.is_punct("(", 1)) {
      cur_.next();
      cur_.next();
      it.kind = SelectItem::Kind::Agg;
      it.fn = *agg;
      if (*agg == AggFn::Count && cur_.accept_punct("*")) {
        it.count_star = true;
      } else {
        it.col = column();
      }
      cur_.expect_punct(")");
    } else {
      it.col = column();
    }
    if (cur_.accept_keyword("as")) it.alias = name("alias");
    return it;
  }

  ColRef column() {
    ColRef c;
    c.pos = cur_.peek().pos;
    c.name = name("column name");
    if (cur_.accept_punct(".")) {
      c.qualifier = std::move(c.name);
      c.name = name("column name");
    }
    return c;
  }

  FromItem from_item() {
    FromItem f;
    f.pos = cur_.peek().pos;
    f.relation = name("relation name");
    cur_.accept_keyword("as");
    const Token& t = cur_.peek();
    if (t.kind == Tok::Ident && !is_reserved(t)) {
      f.alias = t.text;
      cur_.next();
    } else {
      f.alias = f.relation;
    }
    return f;
  }

  Operand operand() {
    Operand o;
    const Token& t = cur_.peek();
    if (t.kind == Tok::Ident && !cur_.is_keyword("true") && !cur_.is_keyword("false")) {
      if (is_reserved(t)) cur_.fail({"column", "literal"});
      o.is_col = true;
      o.col = column();
      return o;
    }
    o.literal = literal();
    return o;
  }

  Value literal() {
    bool negative = cur_.is_punct("-");
    if (negative) cur_.next();
    const Token& t = cur_.peek();
    if (t.kind == Tok::Integer) {
      cur_.next();
      std::string text = negative ? "-" + t.text : t.text;
      std::int64_t v = 0;
      auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc()) throw Error(ErrorKind::SyntaxError, "integer out of range", t.pos);
      return Value::integer(v);
    }
    if (t.kind == Tok::Real) {
      cur_.next();
      double v = std::stod(t.text);
      if (!std::isfinite(v)) throw Error(ErrorKind::SyntaxError, "real out of range", t.pos);
      return Value::real(negative ? -v : v);
    }
    if (negative) cur_.fail({"number"});
    if (t.kind == Tok::String) {
      cur_.next();
      return Value::string(t.text);
    }
    if (cur_.accept_keyword("true")) return Value::boolean(true);
    if (cur_.accept_keyword("false")) return Value::boolean(false);
    cur_.fail({"column", "number", "string", "true", "false"});
  }

  CondAst condition() {
    CondAst c;
    c.pos = cur_.peek().pos;
    c.left = operand();
    static const std::vector<std::pair<std::string, Cmp>> ops = {
        {"=", Cmp::Eq}, {"!=", Cmp::Ne}, {"<>", Cmp::Ne}, {"<=", Cmp::Le},
        {">=", Cmp::Ge}, {"<", Cmp::Lt}, {">", Cmp::Gt}};
    bool found = false;
    for (const auto& [text, cmp] : ops) {
      if (cur_.accept_punct(text)) {
        c.cmp = cmp;
        found = true;
        break;
      }
    }
    if (!found) cur_.fail({"'='", "'!='", "'<>'", "'<'", "'<='", "'>'", "'>='"});
    c.right = operand();
    return c;
  }

  TokenCursor cur_;
};

// ---------------------------------------------------------------------------
// Planning

Cmp flip(Cmp c) {
  switch (c) {
    case Cmp::Lt: return Cmp::Gt;
    case Cmp::Le: return Cmp::Ge;
    case Cmp::Gt: return Cmp::Lt;
    case Cmp::Ge: return Cmp::Le;
    default: return c;
  }
}

using NodePtr = std::shared_ptr<const PlanNode>;

class Planner {
 public:
  explicit Planner(const Schema& schema) : schema_(schema) {}

  NodePtr plan(const SelectAst& s) {
    wide_.clear();
    owner_.clear();
    offset_.clear();

    std::set<std::string> aliases;
    for (std::size_t i = 0; i < s.from.size(); ++i) {
      const auto& f = s.from[i];
      const auto* rel = schema_.find(f.relation);
      if (rel == nullptr) {
        throw Error(ErrorKind::UnknownRelation, "unknown relation '" + f.relation + "'", f.pos);
      }
      if (!aliases.insert(f.alias).second) {
        throw Error(ErrorKind::InvalidQuery, "'" + f.alias + "' appears twice in FROM", f.pos);
      }
      offset_.push_back(wide_.size());
      for (const auto& a : rel->attrs) {
        wide_.push_back({f.alias, a.name, a.type});
        owner_.push_back(i);
      }
    }

    // Resolve conditions against the concatenated FROM columns.
    std::vector<PlanCondition> conds;
    for (const auto& c : s.where) conds.push_back(resolve_condition(c));

    // Per-item selections, then a left-deep join.
    std::vector<std::vector<PlanCondition>> local(s.from.size());
    std::vector<PlanCondition> cross;
    for (const auto& c : conds) {
      std::size_t a = owner_[c.left];
      if (!c.rhs_is_column || owner_[c.right] == a) {
        PlanCondition l = c;
        l.left -= offset_[a];
        if (c.rhs_is_column) l.right -= offset_[a];
        local[a].push_back(l);
      } else {
        cross.push_back(c);
      }
    }

    NodePtr acc;
    std::vector<bool> used(cross.size(), false);
    for (std::size_t i = 0; i < s.from.size(); ++i) {
      NodePtr item = scan(s.from[i]);
      if (!local[i].empty()) item = select(item, local[i]);
      if (!acc) {
        acc = item;
        continue;
      }
      auto join = std::make_shared<PlanNode>();
      join->kind = PlanNode::Kind::Join;
      for (std::size_t k = 0; k < cross.size(); ++k) {
        const auto& c = cross[k];
        if (used[k] || c.cmp != Cmp::Eq) continue;
        std::size_t lo = owner_[c.left], ro = owner_[c.right];
        if (wide_[c.left].type != wide_[c.right].type) continue;
        if (lo < i && ro == i) {
          join->join_keys.emplace_back(c.left, c.right - offset_[i]);
        } else if (ro < i && lo == i) {
          join->join_keys.emplace_back(c.right, c.left - offset_[i]);
        } else {
          continue;
        }
        used[k] = true;
      }
      join->columns = acc->columns;
      join->columns.insert(join->columns.end(), item->columns.begin(), item->columns.end());
      join->children = {acc, item};
      acc = join;
    }
    std::vector<PlanCondition> rest;
    for (std::size_t k = 0; k < cross.size(); ++k) {
      if (!used[k]) rest.push_back(cross[k]);
    }
    if (!rest.empty()) acc = select(acc, rest);

    bool aggregating = s.has_group_by;
    for (const auto& it : s.items) aggregating |= it.kind == SelectItem::Kind::Agg;
    return aggregating ? plan_aggregate(s, acc) : plan_projection(s, acc);
  }

 private:
  std::size_t resolve(const ColRef& c) const {
    std::optional<std::size_t> hit;
    bool qualifier_known = c.qualifier.empty();
    for (std::size_t i = 0; i < wide_.size(); ++i) {
      if (!c.qualifier.empty()) {
        if (wide_[i].qualifier != c.qualifier) continue;
        qualifier_known = true;
      }
      if (wide_[i].name != c.name) continue;
      if (hit) {
        throw Error(ErrorKind::InvalidQuery, "column '" + c.text() + "' is ambiguous", c.pos);
      }
      hit = i;
    }
    if (!qualifier_known) {
      throw Error(ErrorKind::UnknownAttribute, "no FROM item named '" + c.qualifier + "'", c.pos);
    }
    if (!hit) throw Error(ErrorKind::UnknownAttribute, "unknown column '" + c.text() + "'", c.pos);
    return *hit;
  }

  PlanCondition resolve_condition(const CondAst& ast) {
    Operand l = ast.left, r = ast.right;
    Cmp cmp = ast.cmp;
    if (!l.is_col && r.is_col) {
      std::swap(l, r);
      cmp = flip(cmp);
    }
    if (!l.is_col) {
      throw Error(ErrorKind::InvalidQuery, "a condition must mention a column", ast.pos);
    }
    PlanCondition c;
    c.left = resolve(l.col);
    c.cmp = cmp;
    ValueType lt = wide_[c.left].type;
    ValueType rt;
    if (r.is_col) {
      c.rhs_is_column = true;
      c.right = resolve(r.col);
      rt = wide_[c.right].type;
      if (lt != rt && !(is_numeric(lt) && is_numeric(rt))) {
        throw Error(ErrorKind::TypeMismatch,
                    "cannot compare " + l.col.text() + " (" + std::string(to_string(lt)) +
                        ") with " + r.col.text() + " (" + std::string(to_string(rt)) + ")",
                    ast.pos);
      }
    } else {
      rt = r.literal.type();
      if (!(lt == rt || (is_numeric(lt) && is_numeric(rt)))) {
        throw Error(ErrorKind::TypeMismatch,
                    "cannot compare " + l.col.text() + " (" + std::string(to_string(lt)) +
                        ") with " + to_string(r.literal),
                    ast.pos);
      }
      c.constant = r.literal;
    }
    if (is_order_cmp(cmp) && !is_numeric(lt)) {
      throw Error(ErrorKind::TypeMismatch,
                  "order comparison on non-numeric column " + l.col.text(), ast.pos);
    }
    return c;
  }

  NodePtr scan(const FromItem& f) const {
    auto n = std::make_shared<PlanNode>();
    n->kind = PlanNode::Kind::Scan;
    n->relation = f.relation;
    for (const auto& a : schema_.at(f.relation).attrs) n->columns.push_back({f.alias, a.name, a.type});
    return n;
  }

  static NodePtr select(NodePtr child, std::vector<PlanCondition> conds) {
    auto n = std::make_shared<PlanNode>();
    n->kind = PlanNode::Kind::Select;
    n->columns = child->columns;
    n->conditions = std::move(conds);
    n->children = {std::move(child)};
    return n;
  }

  static NodePtr project(NodePtr child, std::vector<std::size_t> idx,
                         std::vector<std::string> names, SourcePos pos) {
    std::set<std::string> seen;
    auto n = std::make_shared<PlanNode>();
    n->kind = PlanNode::Kind::Project;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (!seen.insert(names[k]).second) {
        throw Error(ErrorKind::InvalidQuery,
                    "output column '" + names[k] + "' appears twice; rename with AS", pos);
      }
      n->columns.push_back({"", names[k], child->columns[idx[k]].type});
    }
    n->project = std::move(idx);
    n->children = {std::move(child)};
    return n;
  }

  NodePtr plan_projection(const SelectAst& s, NodePtr child) const {
    std::vector<std::size_t> idx;
    std::vector<std::string> names;
    for (const auto& it : s.items) {
      if (it.kind == SelectItem::Kind::Star) {
        for (std::size_t i = 0; i < wide_.size(); ++i) {
          idx.push_back(i);
          names.push_back(wide_[i].name);
        }
        continue;
      }
      idx.push_back(resolve(it.col));
      names.push_back(it.alias.empty() ? it.col.name : it.alias);
    }
    return project(std::move(child), std::move(idx), std::move(names), s.items.front().pos);
  }

  NodePtr plan_aggregate(const SelectAst& s, NodePtr child) const {
    auto agg = std::make_shared<PlanNode>();
    agg->kind = PlanNode::Kind::GroupAggregate;
    for (const auto& g : s.group_by) {
      std::size_t i = resolve(g);
      if (std::find(agg->group.begin(), agg->group.end(), i) == agg->group.end()) {
        agg->group.push_back(i);
        agg->columns.push_back({"", wide_[i].name, wide_[i].type});
      }
    }
    std::vector<std::size_t> idx;
    std::vector<std::string> names;
    for (const auto& it : s.items) {
      if (it.kind == SelectItem::Kind::Star) {
        throw Error(ErrorKind::InvalidQuery, "'*' cannot be used with aggregation", it.pos);
      }
      if (it.kind == SelectItem::Kind::Column) {
        std::size_t i = resolve(it.col);
        auto pos = std::find(agg->group.begin(), agg->group.end(), i);
        if (pos == agg->group.end()) {
          throw Error(ErrorKind::InvalidQuery,
                      "column '" + it.col.text() + "' must appear in GROUP BY or an aggregate",
                      it.pos);
        }
        idx.push_back(static_cast<std::size_t>(pos - agg->group.begin()));
        names.push_back(it.alias.empty() ? it.col.name : it.alias);
        continue;
      }
      Aggregate a{it.fn, std::nullopt};
      ValueType out_type = ValueType::Integer;
      std::string default_name = "count";
      if (!it.count_star) {
        std::size_t i = resolve(it.col);
        a.input = i;
        ValueType in = wide_[i].type;
        default_name = it.col.name;
        if ((it.fn == AggFn::Avg || it.fn == AggFn::Sum) && !is_numeric(in)) {
          throw Error(ErrorKind::NonNumericAggregate,
                      std::string(to_string(it.fn)) + " needs a numeric column; '" +
                          it.col.text() + "' is " + std::string(to_string(in)),
                      it.pos);
        }
        switch (it.fn) {
          case AggFn::Avg: out_type = ValueType::Real; break;
          case AggFn::Sum:
          case AggFn::Min:
          case AggFn::Max: out_type = in; break;
          case AggFn::Count: out_type = ValueType::Integer; break;
        }
      }
      idx.push_back(agg->columns.size());
      names.push_back(it.alias.empty() ? default_name : it.alias);
      agg->aggregates.push_back(a);
      agg->columns.push_back({"", default_name, out_type});
    }
    agg->children = {std::move(child)};
    return project(std::move(agg), std::move(idx), std::move(names), s.items.front().pos);
  }

  const Schema& schema_;
  std::vector<PlanColumn> wide_;
  std::vector<std::size_t> owner_;
  std::vector<std::size_t> offset_;
};

}  // namespace

QueryPlan parse_query(std::string_view text, std::shared_ptr<const Schema> schema) {
  if (!schema) throw Error(ErrorKind::InvalidArgument, "query planning needs a schema");
  auto selects = QueryParser(text).parse();
  Planner planner(*schema);
  NodePtr root = planner.plan(selects.front());
  for (std::size_t i = 1; i < selects.size(); ++i) {
    if (!selects[i].into.empty()) {
      throw Error(ErrorKind::InvalidQuery, "INTO belongs on the first SELECT of a UNION",
                  selects[i].into_pos);
    }
    NodePtr right = planner.plan(selects[i]);
    if (right->columns.size() != root->columns.size()) {
      throw Error(ErrorKind::InvalidQuery, "UNION operands have " +
                                               std::to_string(root->columns.size()) + " and " +
                                               std::to_string(right->columns.size()) + " columns");
    }
    for (std::size_t c = 0; c < root->columns.size(); ++c) {
      if (root->columns[c].type != right->columns[c].type) {
        throw Error(ErrorKind::InvalidQuery,
                    "UNION column " + std::to_string(c) + " has types " +
                        std::string(to_string(root->columns[c].type)) + " and " +
                        std::string(to_string(right->columns[c].type)));
      }
    }
    auto u = std::make_shared<PlanNode>();
    u->kind = PlanNode::Kind::Union;
    u->columns = root->columns;
    u->children = {root, right};
    root = u;
  }
  std::string name = selects.front().into.empty() ? "Result" : selects.front().into;
  return QueryPlan(std::move(root), std::move(schema), std::move(name));
}

// ---------------------------------------------------------------------------
// Printing

namespace {

void print_node(std::string& out, const PlanNode& n, int depth) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  auto col = [&](const PlanNode& child, std::size_t i) {
    const auto& c = child.columns[i];
    return c.qualifier.empty() ? c.name : c.qualifier + "." + c.name;
  };
  switch (n.kind) {
    case PlanNode::Kind::Scan: out += "Scan " + n.relation; break;
    case PlanNode::Kind::Select: {
      out += "Select";
      const PlanNode& ch = *n.children[0];
      for (std::size_t k = 0; k < n.conditions.size(); ++k) {
        const auto& c = n.conditions[k];
        out += k ? " AND " : " ";
        out += col(ch, c.left) + " " + std::string(to_string(c.cmp)) + " " +
               (c.rhs_is_column ? col(ch, c.right) : to_string(c.constant));
      }
      break;
    }
    case PlanNode::Kind::Project: {
      out += "Project";
      for (std::size_t k = 0; k < n.project.size(); ++k) {
        out += k ? ", " : " ";
        std::string src = col(*n.children[0], n.project[k]);
        out += src;
        if (n.columns[k].name != n.children[0]->columns[n.project[k]].name) {
          out += " AS " + n.columns[k].name;
        }
      }
      break;
    }
    case PlanNode::Kind::Join: {
      out += "Join";
      for (std::size_t k = 0; k < n.join_keys.size(); ++k) {
        out += k ? " AND " : " ";
        out += col(*n.children[0], n.join_keys[k].first) + " = " +
               col(*n.children[1], n.join_keys[k].second);
      }
      break;
    }
    case PlanNode::Kind::GroupAggregate: {
      const PlanNode& ch = *n.children[0];
      out += "GroupAggregate [";
      for (std::size_t k = 0; k < n.group.size(); ++k) out += (k ? ", " : "") + col(ch, n.group[k]);
      out += "]";
      for (const auto& a : n.aggregates) {
        out += " " + std::string(to_string(a.fn)) + "(" + (a.input ? col(ch, *a.input) : "*") + ")";
      }
      break;
    }
    case PlanNode::Kind::Union: out += "Union"; break;
  }
  out += "\n";
  for (const auto& c : n.children) print_node(out, *c, depth + 1);
}

}  // namespace

std::string to_string(const PlanNode& node) {
  std::string out;
  print_node(out, node, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

using detail::Row;
using Rows = std::vector<Row>;

void normalize(Rows& rows) {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

bool compare_values(const Value& a, Cmp cmp, const Value& b) {
  if (a.type() != b.type() && a.is_numeric() && b.is_numeric()) {
    return compare(a.as_number(), cmp, b.as_number());
  }
  return compare(a, cmp, b);
}

using detail::Summation;

Value finish_aggregate(const Aggregate& a, const std::vector<const Row*>& members) {
  if (!a.input) return Value::integer(static_cast<std::int64_t>(members.size()));
  std::size_t col = *a.input;
  switch (a.fn) {
    case AggFn::Count: return Value::integer(static_cast<std::int64_t>(members.size()));
    case AggFn::Min:
    case AggFn::Max: {
      const Value* best = &(*members.front())[col];
      for (const Row* r : members) {
        const Value& v = (*r)[col];
        if (a.fn == AggFn::Min ? v < *best : v > *best) best = &v;
      }
      return *best;
    }
    case AggFn::Sum:
      if (members.front()->at(col).is_integer()) {
        std::int64_t total = 0;
        for (const Row* r : members) {
          if (__builtin_add_overflow(total, (*r)[col].as_integer(), &total)) {
            throw Error(ErrorKind::OverflowToNonFinite, "integer SUM overflows");
          }
        }
        return Value::integer(total);
      }
      [[fallthrough]];
    case AggFn::Avg: {
      Summation s;
      for (const Row* r : members) s.add((*r)[col].as_number());
      double v = a.fn == AggFn::Avg ? s.mean(static_cast<double>(members.size())) : s.value();
      if (!std::isfinite(v)) throw Error(ErrorKind::OverflowToNonFinite, "aggregate overflows");
      return Value::real(v);
    }
  }
  return Value();
}

Rows eval_node(const PlanNode& n, const Instance& world) {
  switch (n.kind) {
    case PlanNode::Kind::Scan: {
      Rows out;
      for (const Fact* f : world.facts_of(n.relation)) out.push_back(f->values);
      return out;  // facts_of is sorted and unique
    }
    case PlanNode::Kind::Select: {
      Rows in = eval_node(*n.children[0], world);
      Rows out;
      for (auto& row : in) {
        bool keep = true;
        for (const auto& c : n.conditions) {
          const Value& rhs = c.rhs_is_column ? row[c.right] : c.constant;
          if (!compare_values(row[c.left], c.cmp, rhs)) {
            keep = false;
            break;
          }
        }
        if (keep) out.push_back(std::move(row));
      }
      return out;
    }
    case PlanNode::Kind::Project: {
      Rows in = eval_node(*n.children[0], world);
      Rows out;
      out.reserve(in.size());
      for (const auto& row : in) {
        Row r;
        r.reserve(n.project.size());
        for (auto i : n.project) r.push_back(row[i]);
        out.push_back(std::move(r));
      }
      normalize(out);
      return out;
    }
    case PlanNode::Kind::Join: {
      Rows left = eval_node(*n.children[0], world);
      Rows right = eval_node(*n.children[1], world);
      Rows out;
      auto emit = [&](const Row& l, const Row& r) {
        Row row = l;
        row.insert(row.end(), r.begin(), r.end());
        out.push_back(std::move(row));
      };
      if (n.join_keys.empty()) {
        for (const auto& l : left) {
          for (const auto& r : right) emit(l, r);
        }
      } else {
        std::unordered_map<Row, std::vector<std::size_t>, detail::RowHash> table;
        for (std::size_t k = 0; k < right.size(); ++k) {
          Row key;
          for (const auto& [li, ri] : n.join_keys) key.push_back(right[k][ri]);
          table[std::move(key)].push_back(k);
        }
        for (const auto& l : left) {
          Row key;
          for (const auto& [li, ri] : n.join_keys) key.push_back(l[li]);
          auto it = table.find(key);
          if (it == table.end()) continue;
          for (auto k : it->second) emit(l, right[k]);
        }
      }
      normalize(out);
      return out;
    }
    case PlanNode::Kind::GroupAggregate: {
      Rows in = eval_node(*n.children[0], world);
      std::map<Row, std::vector<const Row*>> groups;
      for (const auto& row : in) {
        Row key;
        for (auto g : n.group) key.push_back(row[g]);
        groups[std::move(key)].push_back(&row);
      }
      Rows out;
      for (const auto& [key, members] : groups) {
        Row r = key;
        for (const auto& a : n.aggregates) r.push_back(finish_aggregate(a, members));
        out.push_back(std::move(r));
      }
      return out;
    }
    case PlanNode::Kind::Union: {
      Rows out = eval_node(*n.children[0], world);
      Rows right = eval_node(*n.children[1], world);
      out.insert(out.end(), std::make_move_iterator(right.begin()),
                 std::make_move_iterator(right.end()));
      normalize(out);
      return out;
    }
  }
  return {};
}

}  // namespace

Instance eval_query(const QueryPlan& plan, const Instance& world) {
  for (const auto& rel : plan.input_relations()) {
    const auto* want = plan.input_schema().find(rel);
    const auto* got = world.schema().find(rel);
    if (got == nullptr) {
      throw Error(ErrorKind::SchemaMismatch, "world has no relation '" + rel + "'");
    }
    if (got->attrs != want->attrs) {
      throw Error(ErrorKind::SchemaMismatch,
                  "relation '" + rel + "' is declared differently in the world and the query");
    }
  }
  Rows rows = eval_node(plan.root(), world);
  Instance out(plan.output_schema(), InstanceMode::Set);
  for (auto& r : rows) out.insert(Fact{plan.output_relation(), std::move(r)});
  return out;
}

}  // namespace gdl
