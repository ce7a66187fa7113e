#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "osp/delay.hpp"

using namespace osp;

TEST_CASE("delay profiles validate their parameters") {
  CHECK_THROWS_AS(DelayProfile::fixed_delay(-1), ConfigError);
  CHECK_THROWS_AS(DelayProfile::uniform_random(-2, 1), ConfigError);
  CHECK_THROWS_AS(DelayProfile::from_trace({1, -3, 2}), ConfigError);
  CHECK(DelayProfile::fixed_delay(4).tau_max == 4);
  CHECK(DelayProfile::from_trace({0, 5, 2}).tau_max == 5);
}

TEST_CASE("delay sequences read out by round") {
  DelaySequence none(DelayProfile::none(), 5);
  for (long t = 1; t <= 5; ++t) CHECK(none.tau(t) == 0);

  DelaySequence fixed(DelayProfile::fixed_delay(3), 4);
  for (long t = 1; t <= 4; ++t) CHECK(fixed.tau(t) == 3);

  DelaySequence trace(DelayProfile::from_trace({2, 0, 7}), 3);
  CHECK(trace.tau(1) == 2);
  CHECK(trace.tau(2) == 0);
  CHECK(trace.tau(3) == 7);

  CHECK_THROWS_AS(DelaySequence(DelayProfile::from_trace({1, 2}), 3), ConfigError);
}

TEST_CASE("uniform delays are bounded and seed-reproducible") {
  DelayProfile p = DelayProfile::uniform_random(6, 99);
  DelaySequence a(p, 200), b(p, 200);
  bool nonzero = false, nonmax = false;
  for (long t = 1; t <= 200; ++t) {
    CHECK(a.tau(t) >= 0);
    CHECK(a.tau(t) <= 6);
    CHECK(a.tau(t) == b.tau(t));
    nonzero = nonzero || a.tau(t) > 0;
    nonmax = nonmax || a.tau(t) < 6;
  }
  CHECK(nonzero);
  CHECK(nonmax);
  DelaySequence c(DelayProfile::uniform_random(6, 100), 200);
  bool differs = false;
  for (long t = 1; t <= 200 && !differs; ++t) differs = a.tau(t) != c.tau(t);
  CHECK(differs);
}

TEST_CASE("the queue delivers due events in origin order") {
  DelayQueue<std::string> q;
  q.push(3, 6, "c");
  q.push(1, 6, "a");
  q.push(2, 4, "b");
  q.push(5, 9, "e");
  CHECK(q.size() == 4);

  auto due4 = q.pop_due(4);
  REQUIRE(due4.size() == 1);
  CHECK(due4[0].payload == "b");

  // Same delivery round: ties break by origin.
  auto due7 = q.pop_due(7);
  REQUIRE(due7.size() == 2);
  CHECK(due7[0].origin == 1);
  CHECK(due7[1].origin == 3);

  CHECK(q.pop_due(8).empty());
  CHECK(q.size() == 1);  // origin 5 still pending: the caller counts drops

  auto rest = q.pop_due(100);
  REQUIRE(rest.size() == 1);
  CHECK(rest[0].payload == "e");
  CHECK(q.size() == 0);
}

TEST_CASE("multiple due buckets drain oldest delivery first") {
  DelayQueue<int> q;
  q.push(4, 5, 40);
  q.push(1, 2, 10);
  q.push(2, 2, 20);
  auto all = q.pop_due(6);
  REQUIRE(all.size() == 3);
  CHECK(all[0].payload == 10);
  CHECK(all[1].payload == 20);
  CHECK(all[2].payload == 40);
}

TEST_CASE("delivery cannot precede the origin") {
  DelayQueue<int> q;
  CHECK_THROWS_AS(q.push(4, 3, 0), ProtocolError);
  q.push(4, 4, 0);  // zero delay is fine
  CHECK(q.pop_due(4).size() == 1);
}
