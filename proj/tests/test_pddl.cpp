#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "qvp/generators.hpp"
#include "qvp/pddl.hpp"
#include "qvp/task.hpp"

using namespace qvp;

namespace {

std::string fixture(const std::string& name) { return read_file(std::string(QVP_FIXTURES) + "/" + name); }

Domain gripper_domain() { return parse_domain(fixture("gripper-domain.pddl"), "gripper-domain.pddl"); }

}  // namespace

TEST(ParseDomain, GripperCounts) {
  const Domain d = gripper_domain();
  EXPECT_EQ(d.name, "gripper");
  EXPECT_EQ(d.predicates.size(), 4u);
  EXPECT_EQ(d.schemas.size(), 3u);
  for (std::size_t i = 0; i < d.predicates.size(); ++i) EXPECT_EQ(d.predicates[i].id, static_cast<int>(i));
  EXPECT_EQ(d.predicates[1].name, "at");
  EXPECT_EQ(d.schemas[1].name, "pick");
  EXPECT_EQ(d.schemas[1].cost, 1);
}

TEST(ParseDomain, ZeroSchemas) {
  const Domain d = parse_domain("(define (domain empty) (:predicates (p ?x)))");
  EXPECT_TRUE(d.schemas.empty());
  EXPECT_EQ(d.predicates.size(), 1u);
}

TEST(ParseDomain, ForallIsUnsupported) {
  const std::string text =
      "(define (domain d)\n"
      "  (:predicates (p ?x))\n"
      "  (:action a :parameters (?x)\n"
      "    :precondition (forall (?y) (p ?y))\n"
      "    :effect (p ?x)))";
  try {
    parse_domain(text, "d.pddl");
    FAIL() << "expected UnsupportedFeature";
  } catch (const UnsupportedFeature& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_NE(std::string(e.what()).find("forall"), std::string::npos);
    EXPECT_EQ(std::string(e.what()).rfind("d.pddl:4:", 0), 0u);
  }
}

TEST(ParseDomain, RejectsAdlRequirementAndNegation) {
  EXPECT_THROW(parse_domain("(define (domain d) (:requirements :adl))"), UnsupportedFeature);
  EXPECT_THROW(parse_domain("(define (domain d) (:predicates (p)) (:action a :parameters () "
                            ":precondition (not (p)) :effect (p)))"),
               UnsupportedFeature);
  EXPECT_THROW(parse_domain("(define (domain d) (:predicates (p)) (:action a :parameters () "
                            ":precondition (p) :effect (when (p) (p))))"),
               UnsupportedFeature);
}

TEST(ParseDomain, SyntaxErrorsCarryPosition) {
  try {
    parse_domain("(define (domain d)\n  (:predicates (p ?x)", "broken.pddl");
    FAIL();
  } catch (const PddlError& e) {
    EXPECT_EQ(e.source(), "broken.pddl");
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(parse_domain("(define (domain d)) )"), PddlError);
  EXPECT_THROW(parse_domain(""), PddlError);
}

TEST(ParseDomain, DuplicateNames) {
  EXPECT_THROW(parse_domain("(define (domain d) (:predicates (p) (p ?x)))"), PddlError);
  EXPECT_THROW(parse_domain("(define (domain d) (:predicates (p)) "
                            "(:action a :parameters () :effect (p)) (:action a :parameters () :effect (p)))"),
               PddlError);
}

TEST(ParseDomain, ActionCosts) {
  const Domain d = parse_domain(
      "(define (domain c) (:requirements :strips :action-costs) (:predicates (p) (q))"
      " (:functions (total-cost) - number)"
      " (:action a :parameters () :precondition (p) :effect (and (q) (increase (total-cost) 3))))");
  ASSERT_EQ(d.schemas.size(), 1u);
  EXPECT_EQ(d.schemas[0].cost, 3);
  EXPECT_TRUE(d.action_costs);
}

TEST(ParseDomain, TypeMismatchInSchema) {
  EXPECT_THROW(parse_domain("(define (domain d) (:requirements :typing) (:types a b)"
                            " (:predicates (p ?x - a)) (:action act :parameters (?y - b) :effect (p ?y)))"),
               PddlError);
}

TEST(ParseInstance, GripperTwoBalls) {
  const Domain d = gripper_domain();
  const Instance inst = parse_instance(fixture("gripper-2balls.pddl"), d);
  EXPECT_EQ(inst.objects.size(), 6u);
  EXPECT_EQ(inst.goal.size(), 2u);
  EXPECT_EQ(inst.init.size(), 5u);
}

TEST(ParseInstance, GoalSatisfiedInitiallyIsAccepted) {
  const Domain d = gripper_domain();
  const Instance inst = parse_instance(
      "(define (problem p) (:domain gripper) (:objects r - room)"
      " (:init (at-robby r)) (:goal (and (at-robby r))))",
      d);
  EXPECT_EQ(inst.goal.size(), 1u);
}

TEST(ParseInstance, Errors) {
  const Domain d = gripper_domain();
  auto parse = [&](const std::string& body) {
    return parse_instance("(define (problem p) (:domain gripper) (:objects r - room b - ball)" + body + ")", d);
  };
  EXPECT_THROW(parse("(:init (at b))"), PddlError);          // arity
  EXPECT_THROW(parse("(:init (nowhere r))"), PddlError);     // unknown predicate
  EXPECT_THROW(parse("(:init (at-robby x))"), PddlError);    // unknown object
  EXPECT_THROW(parse("(:init (at-robby b))"), PddlError);    // type mismatch
  try {
    parse("(:init (at b))");
  } catch (const PddlError& e) {
    EXPECT_NE(e.message().find("arity"), std::string::npos);
  }
}

TEST(PrettyPrint, RoundTripBuiltinDomainsAndInstances) {
  for (DomainTag tag : {DomainTag::Gripper, DomainTag::Blocksworld, DomainTag::Ferry, DomainTag::Visitall}) {
    const Domain& d = builtin_domain(tag);
    const Domain again = parse_domain(to_pddl(d));
    EXPECT_EQ(again, d) << to_string(tag);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const int size = next_size(tag, min_size(tag) + static_cast<int>(seed));
      const Instance inst = generate_instance({tag, size, seed});
      EXPECT_EQ(parse_instance(to_pddl(inst, d), d), inst);
    }
  }
}

TEST(PrettyPrint, RoundTripWithCostsAndConstants) {
  const Domain d = parse_domain(
      "(define (domain c) (:requirements :strips :typing :action-costs) (:types tile robot - object)"
      " (:constants home - tile) (:predicates (at ?r - robot ?t - tile) (painted ?t - tile))"
      " (:functions (total-cost) - number)"
      " (:action go :parameters (?r - robot ?t - tile) :precondition (at ?r home)"
      "  :effect (and (at ?r ?t) (not (at ?r home)) (increase (total-cost) 2))))");
  EXPECT_EQ(parse_domain(to_pddl(d)), d);
  const Instance inst = parse_instance(
      "(define (problem p) (:domain c) (:objects r1 - robot t1 - tile)"
      " (:init (at r1 home) (= (total-cost) 0)) (:goal (and (at r1 t1))) (:metric minimize (total-cost)))",
      d);
  EXPECT_EQ(parse_instance(to_pddl(inst, d), d), inst);
  const GroundTask task = ground(d, inst);
  // go(r1, home) is a no-op and pruned; go(r1, t1) remains.
  ASSERT_EQ(task.num_actions(), 1u);
  EXPECT_EQ(task.actions[0].cost, 2);
  EXPECT_EQ(task.action_name(0), "go(r1,t1)");
}

TEST(Ground, GripperOneBallHasTenActions) {
  const Domain d = gripper_domain();
  const GroundTask task = ground(d, parse_instance(fixture("gripper-1ball.pddl"), d));
  int move = 0, pick = 0, drop = 0;
  for (const auto& a : task.actions) {
    const auto& n = task.schema_names[a.schema];
    move += n == "move";
    pick += n == "pick";
    drop += n == "drop";
  }
  EXPECT_EQ(move, 2);
  EXPECT_EQ(pick, 4);
  EXPECT_EQ(drop, 4);
  EXPECT_EQ(task.num_actions(), 10u);
  // Schema order, then lexicographic binding.
  EXPECT_EQ(task.action_name(0), "move(rooma,roomb)");
  EXPECT_EQ(task.action_name(1), "move(roomb,rooma)");
}

TEST(Ground, ZeroObjectsOfRequiredType) {
  const Domain d = gripper_domain();
  const GroundTask task = ground(
      d, parse_instance("(define (problem p) (:domain gripper) (:objects ra rb - room)"
                        " (:init (at-robby ra)) (:goal (and (at-robby rb))))",
                        d));
  EXPECT_EQ(task.num_actions(), 2u);  // only moves; pick/drop need balls and grippers
}

// Independent instantiator: every type-consistent binding, filtered by the same
// no-op rule; blocksworld has no static predicates.
TEST(Ground, BlocksworldMatchesBruteForce) {
  const Domain d = parse_domain(fixture("blocksworld-domain.pddl"));
  const Instance inst = parse_instance(fixture("blocksworld-2.pddl"), d);
  const GroundTask task = ground(d, inst);
  std::size_t expected = 0;
  const std::size_t n = inst.objects.size();
  for (const auto& s : d.schemas) {
    std::size_t combos = 1;
    for (int i = 0; i < s.arity(); ++i) combos *= n;
    expected += combos;
  }
  EXPECT_EQ(expected, 12u);
  EXPECT_EQ(task.num_actions(), expected);
}

TEST(Ground, DeterministicAndIndicesValid) {
  const Domain& d = builtin_domain(DomainTag::Ferry);
  const Instance inst = generate_instance({DomainTag::Ferry, 6, 3});
  const GroundTask a = ground(d, inst);
  const GroundTask b = ground(d, inst);
  ASSERT_EQ(a.num_atoms(), b.num_atoms());
  ASSERT_EQ(a.num_actions(), b.num_actions());
  for (AtomId i = 0; i < a.num_atoms(); ++i) EXPECT_EQ(a.atom_name(i), b.atom_name(i));
  for (ActionId i = 0; i < a.num_actions(); ++i) {
    EXPECT_EQ(a.action_name(i), b.action_name(i));
    for (const auto* set : {&a.actions[i].pre, &a.actions[i].add, &a.actions[i].del}) {
      for (AtomId p : *set) EXPECT_LT(p, a.num_atoms());
    }
  }
  for (AtomId p : a.init.atoms()) EXPECT_LT(p, a.num_atoms());
  for (AtomId p : a.goal) EXPECT_LT(p, a.num_atoms());
}

TEST(Ground, StaticPreconditionsPrune) {
  const Domain& d = builtin_domain(DomainTag::Visitall);
  const GroundTask task = ground(d, generate_instance({DomainTag::Visitall, 9, 1}));
  // 3x3 grid: 12 undirected adjacencies, one move per direction.
  EXPECT_EQ(task.num_actions(), 24u);
}
