#include "qvp/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace qvp {

PddlError::PddlError(std::string source, int line, int column, const std::string& message)
    : Error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      source_(std::move(source)),
      line_(line),
      column_(column),
      message_(message) {}

namespace {

struct SExpr {
  bool is_list = false;
  std::string symbol;  // lowercased
  std::vector<SExpr> items;
  int line = 1;
  int column = 1;

  bool is_symbol(std::string_view s) const { return !is_list && symbol == s; }
  bool head_is(std::string_view s) const {
    return is_list && !items.empty() && items.front().is_symbol(s);
  }
};

class Reader {
 public:
  Reader(std::string_view text, const std::string& source) : text_(text), source_(source) {}

  SExpr read_document() {
    skip_space();
    if (pos_ >= text_.size()) fail("expected '(' but found end of input");
    SExpr root = read();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected trailing text after top-level expression");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw PddlError(source_, line_, col_, msg); }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    skip_space();
    SExpr node;
    node.line = line_;
    node.column = col_;
    if (pos_ >= text_.size()) fail("unexpected end of input, expected ')'");
    const char c = text_[pos_];
    if (c == ')') fail("unexpected ')'");
    if (c == '(') {
      advance();
      node.is_list = true;
      while (true) {
        skip_space();
        if (pos_ >= text_.size()) {
          throw PddlError(source_, node.line, node.column, "unbalanced '(': expected ')'");
        }
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        node.items.push_back(read());
      }
      return node;
    }
    while (pos_ < text_.size()) {
      const char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';') break;
      node.symbol.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(d))));
      advance();
    }
    return node;
  }

  std::string_view text_;
  const std::string& source_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::set<std::string, std::less<>> kSupportedRequirements = {":strips", ":typing",
                                                                    ":action-costs"};

const std::set<std::string, std::less<>> kUnsupportedConnectives = {
    "not", "or", "forall", "exists", "imply", "=", "when", "increase", "decrease",
    "assign", "scale-up", "scale-down", "over", "preference", ">", "<", ">=", "<="};

class Interpreter {
 public:
  explicit Interpreter(const std::string& source) : source_(source) {}

  [[noreturn]] void fail(const SExpr& at, const std::string& msg) const {
    throw PddlError(source_, at.line, at.column, msg);
  }
  [[noreturn]] void unsupported(const SExpr& at, const std::string& what) const {
    throw UnsupportedFeature(source_, at.line, at.column, "unsupported feature: " + what);
  }

  const std::string& expect_symbol(const SExpr& e, const char* what) const {
    if (e.is_list || e.symbol.empty()) fail(e, std::string("expected ") + what);
    return e.symbol;
  }

  const SExpr& expect_list(const SExpr& e, const char* what) const {
    if (!e.is_list) fail(e, std::string("expected ") + what + " but found '" + e.symbol + "'");
    return e;
  }

  /// `a b - t c` style list. Returns names with their types ("object" if untyped).
  std::vector<std::pair<TypedName, const SExpr*>> typed_list(const SExpr& list,
                                                             std::size_t first = 0) const {
    std::vector<std::pair<TypedName, const SExpr*>> out;
    std::size_t pending_start = 0;
    for (std::size_t i = first; i < list.items.size(); ++i) {
      const SExpr& item = list.items[i];
      if (item.is_list) {
        if (item.head_is("either")) unsupported(item, "(either ...) types");
        fail(item, "expected name in typed list");
      }
      if (item.symbol == "-") {
        if (i + 1 >= list.items.size()) fail(item, "expected type after '-'");
        const SExpr& type = list.items[i + 1];
        if (type.is_list) {
          if (type.head_is("either")) unsupported(type, "(either ...) types");
          fail(type, "expected type name");
        }
        if (pending_start == out.size()) fail(item, "'-' without preceding names");
        for (std::size_t k = pending_start; k < out.size(); ++k) out[k].first.type = type.symbol;
        pending_start = out.size();
        ++i;
        continue;
      }
      out.push_back({TypedName{item.symbol, "object"}, &item});
    }
    return out;
  }

 private:
  const std::string& source_;
};

void check_header(const Interpreter& in, const SExpr& root, const char* kind, std::string& name) {
  if (!root.is_list || root.items.size() < 2 || !root.items[0].is_symbol("define")) {
    in.fail(root, "expected (define ...)");
  }
  const SExpr& head = root.items[1];
  if (!head.is_list || head.items.size() != 2 || !head.items[0].is_symbol(kind)) {
    in.fail(head, std::string("expected (") + kind + " <name>)");
  }
  name = in.expect_symbol(head.items[1], "name");
}

class DomainBuilder {
 public:
  DomainBuilder(const Interpreter& in, Domain& d) : in_(in), d_(d) {}

  void requirements(const SExpr& sec) {
    for (std::size_t i = 1; i < sec.items.size(); ++i) {
      const std::string& r = in_.expect_symbol(sec.items[i], "requirement flag");
      if (!kSupportedRequirements.count(r)) in_.unsupported(sec.items[i], "requirement " + r);
      if (r == ":action-costs") d_.action_costs = true;
      d_.requirements.push_back(r);
    }
  }

  void types(const SExpr& sec) {
    std::set<std::string> declared;
    for (const auto& [tn, at] : in_.typed_list(sec, 1)) {
      if (tn.name == "object") continue;
      if (!declared.insert(tn.name).second) in_.fail(*at, "duplicate name: type " + tn.name);
      d_.types.emplace_back(tn.name, tn.type);
    }
    // Parents that were only mentioned on the right of '-' derive from object.
    for (std::size_t i = 0; i < d_.types.size(); ++i) {
      const std::string parent = d_.types[i].second;
      if (parent != "object" && !declared.count(parent)) {
        declared.insert(parent);
        d_.types.emplace_back(parent, "object");
      }
    }
  }

  void constants(const SExpr& sec) {
    for (const auto& [tn, at] : in_.typed_list(sec, 1)) {
      check_type(*at, tn.type);
      if (d_.find_constant(tn.name)) in_.fail(*at, "duplicate name: constant " + tn.name);
      d_.constants.push_back(tn);
    }
  }

  void predicates(const SExpr& sec) {
    for (std::size_t i = 1; i < sec.items.size(); ++i) {
      const SExpr& p = in_.expect_list(sec.items[i], "predicate declaration");
      if (p.items.empty()) in_.fail(p, "empty predicate declaration");
      Predicate pred;
      pred.name = in_.expect_symbol(p.items[0], "predicate name");
      if (d_.find_predicate(pred.name)) in_.fail(p, "duplicate name: predicate " + pred.name);
      for (const auto& [tn, at] : in_.typed_list(p, 1)) {
        if (tn.name.empty() || tn.name[0] != '?') in_.fail(*at, "expected variable");
        check_type(*at, tn.type);
        pred.parameters.push_back(tn);
      }
      pred.id = static_cast<int>(d_.predicates.size());
      d_.predicates.push_back(std::move(pred));
    }
  }

  void functions(const SExpr& sec) {
    for (std::size_t i = 1; i < sec.items.size(); ++i) {
      const SExpr& f = sec.items[i];
      if (f.is_list && f.items.size() == 1 && f.items[0].is_symbol("total-cost")) continue;
      if (f.is_symbol("-") && i + 1 < sec.items.size() && sec.items[i + 1].is_symbol("number")) {
        ++i;
        continue;
      }
      in_.unsupported(f, "numeric fluents (only (total-cost) is allowed)");
    }
  }

  void action(const SExpr& sec) {
    if (sec.items.size() < 2) in_.fail(sec, "expected action name");
    ActionSchema schema;
    schema.name = in_.expect_symbol(sec.items[1], "action name");
    if (d_.find_schema(schema.name)) in_.fail(sec.items[1], "duplicate name: action " + schema.name);
    schema.cost = d_.action_costs ? 0 : 1;
    const SExpr* pre = nullptr;
    const SExpr* eff = nullptr;
    for (std::size_t i = 2; i < sec.items.size(); i += 2) {
      const std::string& key = in_.expect_symbol(sec.items[i], "action keyword");
      if (i + 1 >= sec.items.size()) in_.fail(sec.items[i], "missing value for " + key);
      const SExpr& val = sec.items[i + 1];
      if (key == ":parameters") {
        in_.expect_list(val, "parameter list");
        for (const auto& [tn, at] : in_.typed_list(val)) {
          if (tn.name.empty() || tn.name[0] != '?') in_.fail(*at, "expected variable");
          check_type(*at, tn.type);
          for (const auto& p : schema.parameters) {
            if (p.name == tn.name) in_.fail(*at, "duplicate name: parameter " + tn.name);
          }
          schema.parameters.push_back(tn);
        }
      } else if (key == ":precondition") {
        pre = &val;
      } else if (key == ":effect") {
        eff = &val;
      } else {
        in_.unsupported(sec.items[i], "action keyword " + key);
      }
    }
    if (pre) conditions(*pre, schema, schema.precondition);
    if (eff) effects(*eff, schema);
    // Add-after-delete semantics: an atom both added and deleted stays true.
    std::erase_if(schema.del, [&](const LiftedAtom& a) {
      return std::find(schema.add.begin(), schema.add.end(), a) != schema.add.end();
    });
    d_.schemas.push_back(std::move(schema));
  }

 private:
  void check_type(const SExpr& at, const std::string& type) const {
    if (!d_.has_type(type)) in_.fail(at, "unknown type " + type);
  }

  LiftedAtom atom(const SExpr& e, const ActionSchema& schema) const {
    const std::string& pname = in_.expect_symbol(e.items[0], "predicate name");
    const auto pid = d_.find_predicate(pname);
    if (!pid) in_.fail(e, "unknown predicate " + pname);
    const Predicate& pred = d_.predicates[*pid];
    if (static_cast<int>(e.items.size()) - 1 != pred.arity()) {
      in_.fail(e, "arity mismatch for " + pname + ": expected " + std::to_string(pred.arity()) +
                      ", got " + std::to_string(e.items.size() - 1));
    }
    LiftedAtom a{*pid, {}};
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      const std::string& t = in_.expect_symbol(e.items[i], "term");
      std::string type;
      if (t[0] == '?') {
        auto it = std::find_if(schema.parameters.begin(), schema.parameters.end(),
                               [&](const TypedName& p) { return p.name == t; });
        if (it == schema.parameters.end()) in_.fail(e.items[i], "undeclared variable " + t);
        a.args.push_back({Term::Kind::Parameter, static_cast<int>(it - schema.parameters.begin())});
        type = it->type;
      } else {
        const auto c = d_.find_constant(t);
        if (!c) in_.fail(e.items[i], "unknown constant " + t);
        a.args.push_back({Term::Kind::Constant, *c});
        type = d_.constants[*c].type;
      }
      const std::string& want = pred.parameters[i - 1].type;
      if (!d_.is_subtype(type, want)) {
        in_.fail(e.items[i], "type mismatch: " + t + " is " + type + ", " + pname + " expects " + want);
      }
    }
    return a;
  }

  void conditions(const SExpr& e, const ActionSchema& schema, std::vector<LiftedAtom>& out) const {
    if (!e.is_list) in_.fail(e, "expected condition");
    if (e.items.empty()) return;
    if (e.items[0].is_list) in_.fail(e, "expected connective or predicate name");
    const std::string& head = e.items[0].symbol;
    if (head == "and") {
      for (std::size_t i = 1; i < e.items.size(); ++i) conditions(e.items[i], schema, out);
      return;
    }
    if (kUnsupportedConnectives.count(head)) {
      in_.unsupported(e, "(" + head + " ...) in precondition");
    }
    out.push_back(atom(e, schema));
  }

  void effects(const SExpr& e, ActionSchema& schema) const {
    if (!e.is_list) in_.fail(e, "expected effect");
    if (e.items.empty()) return;
    if (e.items[0].is_list) in_.fail(e, "expected connective or predicate name");
    const std::string& head = e.items[0].symbol;
    if (head == "and") {
      for (std::size_t i = 1; i < e.items.size(); ++i) effects(e.items[i], schema);
      return;
    }
    if (head == "not") {
      if (e.items.size() != 2 || !e.items[1].is_list || e.items[1].items.empty()) {
        in_.fail(e, "expected (not <atom>)");
      }
      schema.del.push_back(atom(e.items[1], schema));
      return;
    }
    if (head == "increase") {
      if (e.items.size() == 3 && e.items[1].is_list && e.items[1].items.size() == 1 &&
          e.items[1].items[0].is_symbol("total-cost") && !e.items[2].is_list) {
        if (!d_.action_costs) in_.fail(e, "(increase (total-cost) ...) requires :action-costs");
        const std::string& v = e.items[2].symbol;
        if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
          in_.unsupported(e.items[2], "non-constant action cost " + v);
        }
        schema.cost += std::stoi(v);
        return;
      }
      in_.unsupported(e, "numeric effect");
    }
    if (kUnsupportedConnectives.count(head)) in_.unsupported(e, "(" + head + " ...) in effect");
    schema.add.push_back(atom(e, schema));
  }

  const Interpreter& in_;
  Domain& d_;
};

NamedAtom ground_atom(const Interpreter& in, const SExpr& e, const Domain& d,
                      const std::map<std::string, std::string, std::less<>>& object_types) {
  if (!e.is_list || e.items.empty()) in.fail(e, "expected ground atom");
  const std::string& pname = in.expect_symbol(e.items[0], "predicate name");
  if (kUnsupportedConnectives.count(pname)) in.unsupported(e, "(" + pname + " ...) in problem");
  const auto pid = d.find_predicate(pname);
  if (!pid) in.fail(e, "unknown predicate " + pname);
  const Predicate& pred = d.predicates[*pid];
  if (static_cast<int>(e.items.size()) - 1 != pred.arity()) {
    in.fail(e, "arity mismatch for " + pname + ": expected " + std::to_string(pred.arity()) +
                   ", got " + std::to_string(e.items.size() - 1));
  }
  NamedAtom a{*pid, {}};
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const std::string& o = in.expect_symbol(e.items[i], "object name");
    auto it = object_types.find(o);
    if (it == object_types.end()) in.fail(e.items[i], "unknown object " + o);
    const std::string& want = pred.parameters[i - 1].type;
    if (!d.is_subtype(it->second, want)) {
      in.fail(e.items[i], "type mismatch: " + o + " is " + it->second + ", " + pname + " expects " + want);
    }
    a.args.push_back(o);
  }
  return a;
}

void ground_conjunction(const Interpreter& in, const SExpr& e, const Domain& d,
                        const std::map<std::string, std::string, std::less<>>& types,
                        std::vector<NamedAtom>& out) {
  if (!e.is_list) in.fail(e, "expected goal condition");
  if (e.items.empty()) return;
  if (e.items[0].is_symbol("and")) {
    for (std::size_t i = 1; i < e.items.size(); ++i) ground_conjunction(in, e.items[i], d, types, out);
    return;
  }
  out.push_back(ground_atom(in, e, d, types));
}

std::string typed_names(const std::vector<TypedName>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) s += ' ';
    s += names[i].name + " - " + names[i].type;
  }
  return s;
}

std::string lifted_string(const Domain& d, const ActionSchema& a, const LiftedAtom& atom) {
  std::string s = "(" + d.predicates[atom.predicate].name;
  for (const Term& t : atom.args) {
    s += ' ';
    s += t.kind == Term::Kind::Parameter ? a.parameters[t.index].name : d.constants[t.index].name;
  }
  return s + ")";
}

std::string named_string(const Domain& d, const NamedAtom& atom) {
  std::string s = "(" + d.predicates[atom.predicate].name;
  for (const auto& o : atom.args) s += " " + o;
  return s + ")";
}

}  // namespace

std::optional<int> Domain::find_predicate(std::string_view n) const {
  for (const auto& p : predicates) {
    if (p.name == n) return p.id;
  }
  return std::nullopt;
}

std::optional<int> Domain::find_constant(std::string_view n) const {
  for (std::size_t i = 0; i < constants.size(); ++i) {
    if (constants[i].name == n) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> Domain::find_schema(std::string_view n) const {
  for (std::size_t i = 0; i < schemas.size(); ++i) {
    if (schemas[i].name == n) return static_cast<int>(i);
  }
  return std::nullopt;
}

bool Domain::has_type(std::string_view t) const {
  if (t == "object") return true;
  return std::any_of(types.begin(), types.end(), [&](const auto& p) { return p.first == t; });
}

bool Domain::is_subtype(std::string_view t, std::string_view ancestor) const {
  std::string cur(t);
  for (std::size_t guard = 0; guard <= types.size() + 1; ++guard) {
    if (cur == ancestor) return true;
    if (cur == "object") return false;
    auto it = std::find_if(types.begin(), types.end(), [&](const auto& p) { return p.first == cur; });
    if (it == types.end()) return false;
    cur = it->second;
  }
  return false;  // cyclic hierarchy
}

Domain parse_domain(std::string_view text, const std::string& source) {
  Reader reader(text, source);
  const SExpr root = reader.read_document();
  Interpreter in(source);
  Domain d;
  check_header(in, root, "domain", d.name);
  DomainBuilder b(in, d);
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& sec = in.expect_list(root.items[i], "domain section");
    if (sec.items.empty() || sec.items[0].is_list) in.fail(sec, "expected section keyword");
    const std::string& key = sec.items[0].symbol;
    if (key == ":requirements") {
      b.requirements(sec);
    } else if (key == ":types") {
      b.types(sec);
    } else if (key == ":constants") {
      b.constants(sec);
    } else if (key == ":predicates") {
      b.predicates(sec);
    } else if (key == ":functions") {
      b.functions(sec);
    } else if (key == ":action") {
      b.action(sec);
    } else {
      in.unsupported(sec, "section " + key);
    }
  }
  return d;
}

Instance parse_instance(std::string_view text, const Domain& domain, const std::string& source) {
  Reader reader(text, source);
  const SExpr root = reader.read_document();
  Interpreter in(source);
  Instance inst;
  check_header(in, root, "problem", inst.name);
  inst.domain_name = domain.name;

  std::map<std::string, std::string, std::less<>> types;
  for (const auto& c : domain.constants) types[c.name] = c.type;

  const SExpr* init = nullptr;
  const SExpr* goal = nullptr;
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& sec = in.expect_list(root.items[i], "problem section");
    if (sec.items.empty() || sec.items[0].is_list) in.fail(sec, "expected section keyword");
    const std::string& key = sec.items[0].symbol;
    if (key == ":domain") {
      if (sec.items.size() != 2) in.fail(sec, "expected (:domain <name>)");
      inst.domain_name = in.expect_symbol(sec.items[1], "domain name");
      if (inst.domain_name != domain.name) {
        in.fail(sec.items[1], "problem is for domain " + inst.domain_name + ", not " + domain.name);
      }
    } else if (key == ":requirements") {
      for (std::size_t k = 1; k < sec.items.size(); ++k) {
        const std::string& r = in.expect_symbol(sec.items[k], "requirement flag");
        if (!kSupportedRequirements.count(r)) in.unsupported(sec.items[k], "requirement " + r);
      }
    } else if (key == ":objects") {
      for (const auto& [tn, at] : in.typed_list(sec, 1)) {
        if (!domain.has_type(tn.type)) in.fail(*at, "unknown type " + tn.type);
        if (types.count(tn.name)) in.fail(*at, "duplicate name: object " + tn.name);
        types[tn.name] = tn.type;
        inst.objects.push_back(tn);
      }
    } else if (key == ":init") {
      init = &sec;
    } else if (key == ":goal") {
      if (sec.items.size() != 2) in.fail(sec, "expected (:goal <condition>)");
      goal = &sec.items[1];
    } else if (key == ":metric") {
      if (!(sec.items.size() == 3 && sec.items[1].is_symbol("minimize") && sec.items[2].is_list &&
            sec.items[2].items.size() == 1 && sec.items[2].items[0].is_symbol("total-cost"))) {
        in.unsupported(sec, "metric other than (minimize (total-cost))");
      }
    } else {
      in.unsupported(sec, "section " + key);
    }
  }
  if (init) {
    for (std::size_t k = 1; k < init->items.size(); ++k) {
      const SExpr& e = init->items[k];
      if (e.head_is("=")) {
        if (e.items.size() == 3 && e.items[1].is_list && e.items[1].items.size() == 1 &&
            e.items[1].items[0].is_symbol("total-cost") && e.items[2].is_symbol("0")) {
          continue;
        }
        in.unsupported(e, "numeric initial value");
      }
      NamedAtom a = ground_atom(in, e, domain, types);
      if (std::find(inst.init.begin(), inst.init.end(), a) == inst.init.end()) {
        inst.init.push_back(std::move(a));
      }
    }
  }
  if (goal) {
    std::vector<NamedAtom> g;
    ground_conjunction(in, *goal, domain, types, g);
    for (auto& a : g) {
      if (std::find(inst.goal.begin(), inst.goal.end(), a) == inst.goal.end()) {
        inst.goal.push_back(std::move(a));
      }
    }
  }
  return inst;
}

std::string to_pddl(const Domain& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  if (!d.requirements.empty()) {
    os << "  (:requirements";
    for (const auto& r : d.requirements) os << ' ' << r;
    os << ")\n";
  }
  if (!d.types.empty()) {
    os << "  (:types";
    for (const auto& [t, parent] : d.types) os << ' ' << t << " - " << parent;
    os << ")\n";
  }
  if (!d.constants.empty()) os << "  (:constants " << typed_names(d.constants) << ")\n";
  os << "  (:predicates";
  for (const auto& p : d.predicates) {
    os << "\n    (" << p.name;
    if (!p.parameters.empty()) os << ' ' << typed_names(p.parameters);
    os << ')';
  }
  os << ")\n";
  if (d.action_costs) os << "  (:functions (total-cost) - number)\n";
  for (const auto& a : d.schemas) {
    os << "  (:action " << a.name << "\n";
    os << "    :parameters (" << typed_names(a.parameters) << ")\n";
    os << "    :precondition (and";
    for (const auto& p : a.precondition) os << ' ' << lifted_string(d, a, p);
    os << ")\n    :effect (and";
    for (const auto& p : a.add) os << ' ' << lifted_string(d, a, p);
    for (const auto& p : a.del) os << " (not " << lifted_string(d, a, p) << ')';
    if (d.action_costs) os << " (increase (total-cost) " << a.cost << ')';
    os << "))\n";
  }
  os << ")\n";
  return os.str();
}

std::string to_pddl(const Instance& inst, const Domain& d) {
  std::ostringstream os;
  os << "(define (problem " << inst.name << ")\n";
  os << "  (:domain " << (inst.domain_name.empty() ? d.name : inst.domain_name) << ")\n";
  os << "  (:objects " << typed_names(inst.objects) << ")\n";
  os << "  (:init";
  for (const auto& a : inst.init) os << "\n    " << named_string(d, a);
  if (d.action_costs) os << "\n    (= (total-cost) 0)";
  os << ")\n  (:goal (and";
  for (const auto& a : inst.goal) os << "\n    " << named_string(d, a);
  os << "))\n";
  if (d.action_costs) os << "  (:metric minimize (total-cost))\n";
  os << ")\n";
  return os.str();
}

std::string atom_string(const Domain& d, const NamedAtom& atom) {
  std::string s = d.predicates[atom.predicate].name + "(";
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    if (i) s += ',';
    s += atom.args[i];
  }
  return s + ")";
}

std::uint64_t domain_fingerprint(const Domain& d) { return hash_string(to_pddl(d)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qvp
