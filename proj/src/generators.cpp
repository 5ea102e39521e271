#include "qvp/generators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qvp {

namespace {

const std::string kGripper = R"((define (domain gripper)
  (:requirements :strips :typing)
  (:types room ball gripper)
  (:predicates (at-robby ?r - room)
               (at ?b - ball ?r - room)
               (free ?g - gripper)
               (carry ?b - ball ?g - gripper))
  (:action move
    :parameters (?from ?to - room)
    :precondition (at-robby ?from)
    :effect (and (at-robby ?to) (not (at-robby ?from))))
  (:action pick
    :parameters (?obj - ball ?room - room ?gripper - gripper)
    :precondition (and (at ?obj ?room) (at-robby ?room) (free ?gripper))
    :effect (and (carry ?obj ?gripper) (not (at ?obj ?room)) (not (free ?gripper))))
  (:action drop
    :parameters (?obj - ball ?room - room ?gripper - gripper)
    :precondition (and (carry ?obj ?gripper) (at-robby ?room))
    :effect (and (at ?obj ?room) (free ?gripper) (not (carry ?obj ?gripper)))))
)";

const std::string kBlocksworld = R"((define (domain blocksworld)
  (:requirements :strips :typing)
  (:types block)
  (:predicates (on ?x - block ?y - block)
               (ontable ?x - block)
               (clear ?x - block)
               (handempty)
               (holding ?x - block))
  (:action pick-up
    :parameters (?x - block)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (holding ?x) (not (ontable ?x)) (not (clear ?x)) (not (handempty))))
  (:action put-down
    :parameters (?x - block)
    :precondition (holding ?x)
    :effect (and (ontable ?x) (clear ?x) (handempty) (not (holding ?x))))
  (:action stack
    :parameters (?x - block ?y - block)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (on ?x ?y) (clear ?x) (handempty) (not (holding ?x)) (not (clear ?y))))
  (:action unstack
    :parameters (?x - block ?y - block)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (on ?x ?y)) (not (clear ?x)) (not (handempty)))))
)";

const std::string kFerry = R"((define (domain ferry)
  (:requirements :strips :typing)
  (:types car location)
  (:predicates (at-ferry ?l - location)
               (at ?c - car ?l - location)
               (empty-ferry)
               (on ?c - car))
  (:action sail
    :parameters (?from ?to - location)
    :precondition (at-ferry ?from)
    :effect (and (at-ferry ?to) (not (at-ferry ?from))))
  (:action board
    :parameters (?car - car ?loc - location)
    :precondition (and (at ?car ?loc) (at-ferry ?loc) (empty-ferry))
    :effect (and (on ?car) (not (at ?car ?loc)) (not (empty-ferry))))
  (:action debark
    :parameters (?car - car ?loc - location)
    :precondition (and (on ?car) (at-ferry ?loc))
    :effect (and (at ?car ?loc) (empty-ferry) (not (on ?car)))))
)";

const std::string kVisitall = R"((define (domain visitall)
  (:requirements :strips :typing)
  (:types place)
  (:predicates (connected ?x - place ?y - place)
               (at-robot ?x - place)
               (visited ?x - place))
  (:action move
    :parameters (?from ?to - place)
    :precondition (and (at-robot ?from) (connected ?from ?to))
    :effect (and (at-robot ?to) (visited ?to) (not (at-robot ?from)))))
)";

int isqrt(int n) {
  int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(std::max(n, 0)))));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

struct Builder {
  const Domain& domain;
  Instance inst;

  void object(std::string name, std::string type) { inst.objects.push_back({std::move(name), std::move(type)}); }
  NamedAtom atom(const char* pred, std::vector<std::string> args) {
    return NamedAtom{*domain.find_predicate(pred), std::move(args)};
  }
  void init(const char* pred, std::vector<std::string> args) { inst.init.push_back(atom(pred, std::move(args))); }
  void goal(const char* pred, std::vector<std::string> args) { inst.goal.push_back(atom(pred, std::move(args))); }
};

bool goal_holds_initially(const Instance& inst) {
  return std::all_of(inst.goal.begin(), inst.goal.end(), [&](const NamedAtom& g) {
    return std::find(inst.init.begin(), inst.init.end(), g) != inst.init.end();
  });
}

Instance gripper(int size, Rng& rng) {
  Builder b{builtin_domain(DomainTag::Gripper), {}};
  const int balls = size - 4;
  const std::string rooms[2] = {"rooma", "roomb"};
  b.object("rooma", "room");
  b.object("roomb", "room");
  b.object("left", "gripper");
  b.object("right", "gripper");
  for (int i = 1; i <= balls; ++i) b.object("ball" + std::to_string(i), "ball");
  b.init("at-robby", {rooms[rng.below(2)]});
  b.init("free", {"left"});
  b.init("free", {"right"});
  for (int i = 1; i <= balls; ++i) b.init("at", {"ball" + std::to_string(i), rooms[rng.below(2)]});
  for (int i = 1; i <= balls; ++i) b.goal("at", {"ball" + std::to_string(i), rooms[rng.below(2)]});
  return b.inst;
}

// Random tower configuration: a shuffled order cut into stacks at random gaps.
std::vector<std::vector<int>> random_towers(int n, Rng& rng) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<std::vector<int>> towers(1);
  for (int i = 0; i < n; ++i) {
    if (i > 0 && rng.coin()) towers.emplace_back();
    towers.back().push_back(order[i]);
  }
  return towers;
}

Instance blocksworld(int size, Rng& rng) {
  Builder b{builtin_domain(DomainTag::Blocksworld), {}};
  auto name = [](int i) { return "b" + std::to_string(i + 1); };
  for (int i = 0; i < size; ++i) b.object(name(i), "block");
  for (const auto& t : random_towers(size, rng)) {
    b.init("ontable", {name(t.front())});
    for (std::size_t k = 1; k < t.size(); ++k) b.init("on", {name(t[k]), name(t[k - 1])});
    b.init("clear", {name(t.back())});
  }
  b.init("handempty", {});
  for (const auto& t : random_towers(size, rng)) {
    b.goal("ontable", {name(t.front())});
    for (std::size_t k = 1; k < t.size(); ++k) b.goal("on", {name(t[k]), name(t[k - 1])});
  }
  return b.inst;
}

Instance ferry(int size, Rng& rng) {
  Builder b{builtin_domain(DomainTag::Ferry), {}};
  const int locations = static_cast<int>(rng.between(2, size - 1));
  const int cars = size - locations;
  auto loc = [](std::uint64_t i) { return "l" + std::to_string(i + 1); };
  for (int i = 0; i < locations; ++i) b.object(loc(i), "location");
  for (int i = 1; i <= cars; ++i) b.object("c" + std::to_string(i), "car");
  b.init("at-ferry", {loc(rng.below(locations))});
  b.init("empty-ferry", {});
  for (int i = 1; i <= cars; ++i) b.init("at", {"c" + std::to_string(i), loc(rng.below(locations))});
  for (int i = 1; i <= cars; ++i) b.goal("at", {"c" + std::to_string(i), loc(rng.below(locations))});
  return b.inst;
}

Instance visitall(int size, Rng& rng) {
  Builder b{builtin_domain(DomainTag::Visitall), {}};
  const int g = isqrt(size);
  auto cell = [](int x, int y) { return "cell-" + std::to_string(x) + "-" + std::to_string(y); };
  for (int x = 0; x < g; ++x) {
    for (int y = 0; y < g; ++y) b.object(cell(x, y), "place");
  }
  for (int x = 0; x < g; ++x) {
    for (int y = 0; y < g; ++y) {
      if (x + 1 < g) {
        b.init("connected", {cell(x, y), cell(x + 1, y)});
        b.init("connected", {cell(x + 1, y), cell(x, y)});
      }
      if (y + 1 < g) {
        b.init("connected", {cell(x, y), cell(x, y + 1)});
        b.init("connected", {cell(x, y + 1), cell(x, y)});
      }
    }
  }
  const int sx = static_cast<int>(rng.below(g));
  const int sy = static_cast<int>(rng.below(g));
  b.init("at-robot", {cell(sx, sy)});
  b.init("visited", {cell(sx, sy)});
  for (int x = 0; x < g; ++x) {
    for (int y = 0; y < g; ++y) {
      if (rng.coin()) b.goal("visited", {cell(x, y)});
    }
  }
  return b.inst;
}

}  // namespace

const char* to_string(DomainTag tag) {
  switch (tag) {
    case DomainTag::Gripper:
      return "gripper";
    case DomainTag::Blocksworld:
      return "blocksworld";
    case DomainTag::Ferry:
      return "ferry";
    case DomainTag::Visitall:
      return "visitall";
  }
  return "?";
}

DomainTag parse_domain_tag(std::string_view name) {
  for (DomainTag t : {DomainTag::Gripper, DomainTag::Blocksworld, DomainTag::Ferry, DomainTag::Visitall}) {
    if (name == to_string(t)) return t;
  }
  throw ConfigError("unknown builtin domain '" + std::string(name) + "'");
}

const std::string& builtin_domain_text(DomainTag tag) {
  switch (tag) {
    case DomainTag::Gripper:
      return kGripper;
    case DomainTag::Blocksworld:
      return kBlocksworld;
    case DomainTag::Ferry:
      return kFerry;
    case DomainTag::Visitall:
      return kVisitall;
  }
  return kGripper;
}

const Domain& builtin_domain(DomainTag tag) {
  static const std::map<DomainTag, Domain> domains = [] {
    std::map<DomainTag, Domain> m;
    for (DomainTag t : {DomainTag::Gripper, DomainTag::Blocksworld, DomainTag::Ferry, DomainTag::Visitall}) {
      m.emplace(t, parse_domain(builtin_domain_text(t), std::string(to_string(t)) + ".pddl"));
    }
    return m;
  }();
  return domains.at(tag);
}

int min_size(DomainTag tag) {
  switch (tag) {
    case DomainTag::Gripper:
      return 5;
    case DomainTag::Blocksworld:
      return 2;
    case DomainTag::Ferry:
      return 3;
    case DomainTag::Visitall:
      return 4;
  }
  return 1;
}

int max_size(DomainTag tag) { return tag == DomainTag::Visitall ? 1000 : 100; }

bool is_feasible_size(DomainTag tag, int size) {
  if (size < min_size(tag)) return false;
  if (tag == DomainTag::Visitall) {
    const int g = isqrt(size);
    return g * g == size;
  }
  return true;
}

int next_size(DomainTag tag, int size) {
  int n = std::max(size + 1, min_size(tag));
  while (!is_feasible_size(tag, n)) ++n;
  return n;
}

std::vector<int> feasible_sizes(DomainTag tag, int lo, int hi) {
  std::vector<int> out;
  for (int n = lo; n <= hi; ++n) {
    if (is_feasible_size(tag, n)) out.push_back(n);
  }
  return out;
}

std::pair<int, int> default_training_range(DomainTag tag) {
  switch (tag) {
    case DomainTag::Gripper:
      return {2, 25};
    case DomainTag::Blocksworld:
      return {2, 16};
    case DomainTag::Ferry:
      return {3, 25};
    case DomainTag::Visitall:
      return {4, 81};
  }
  return {2, 10};
}

Instance generate_instance(const GeneratorSpec& spec) {
  if (!is_feasible_size(spec.domain, spec.size)) {
    throw InfeasibleSize(std::string(to_string(spec.domain)) + " has no instances of size " +
                         std::to_string(spec.size));
  }
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(spec.domain), spec.size, attempt));
    Instance inst;
    switch (spec.domain) {
      case DomainTag::Gripper:
        inst = gripper(spec.size, rng);
        break;
      case DomainTag::Blocksworld:
        inst = blocksworld(spec.size, rng);
        break;
      case DomainTag::Ferry:
        inst = ferry(spec.size, rng);
        break;
      case DomainTag::Visitall:
        inst = visitall(spec.size, rng);
        break;
    }
    if (goal_holds_initially(inst)) continue;
    inst.domain_name = to_string(spec.domain);
    inst.name = std::string(to_string(spec.domain)) + "-n" + std::to_string(spec.size) + "-s" +
                std::to_string(spec.seed % 1000000007ULL);
    return inst;
  }
}

std::optional<Instance> InstanceBatch::next(int size, std::uint64_t seed) {
  const Domain& d = builtin_domain(tag_);
  for (int attempt = 0; attempt < max_attempts_; ++attempt) {
    GeneratorSpec spec{tag_, size, derive_seed(seed, attempt)};
    Instance inst = generate_instance(spec);
    Instance keyed = inst;
    keyed.name = "x";
    std::sort(keyed.init.begin(), keyed.init.end());
    std::sort(keyed.goal.begin(), keyed.goal.end());
    if (seen_.insert(to_pddl(keyed, d)).second) return inst;
  }
  return std::nullopt;
}

}  // namespace qvp
