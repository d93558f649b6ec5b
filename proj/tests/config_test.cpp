//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tflow/config.h"
#include "tflow/error.h"

namespace tflow {
namespace {

TEST(ConfigTest, ParsesSectionsAndComments) {
  const Config c = Config::parse(
      "top = 1\n"
      "# comment\n"
      "[train]\n"
      "lr = 0.01\n"
      "; other comment\n"
      "epochs=5\n"
      "[encoder]\n"
      "trainable = false\n");
  EXPECT_EQ(c.get("top", ""), "1");
  EXPECT_EQ(c.get_double("train.lr", 0.0), 0.01);
  EXPECT_EQ(c.get_int("train.epochs", 0), 5);
  EXPECT_FALSE(c.get_bool("encoder.trainable", true));
  EXPECT_EQ(c.get_int("train.missing", 42), 42);
}

TEST(ConfigTest, ErrorsCarryLineNumbers) {
  try {
    Config::parse("[a]\nx = 1\nbroken line\n");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kFormat);
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
  EXPECT_THROW(Config::parse("[unclosed\n"), Error);
  const Config c = Config::parse("[a]\nx = abc\n");
  EXPECT_THROW(c.get_int("a.x", 0), Error);
  EXPECT_THROW(c.get_double("a.x", 0), Error);
  EXPECT_THROW(c.get_bool("a.x", false), Error);
  EXPECT_THROW(Config::load("/nonexistent/config.ini"), Error);
}

TEST(ConfigTest, CanonicalTextRoundTrips) {
  Config c;
  c.set("train.lr", "0.001");
  c.set("flow.bond_blocks", "4");
  c.set("plain", "yes");
  c.set("flow.atom_blocks", "2");
  const std::string text = c.to_text();
  EXPECT_EQ(text.find("plain"), 0U);
  const Config back = Config::parse(text);
  EXPECT_EQ(back.values(), c.values());
  EXPECT_EQ(back.to_text(), text);
}

TEST(ConfigTest, MergeOverrides) {
  Config a, b;
  a.set("x.a", "1");
  a.set("x.b", "2");
  b.set("x.b", "3");
  a.merge(b);
  EXPECT_EQ(a.get("x.a", ""), "1");
  EXPECT_EQ(a.get("x.b", ""), "3");
}

TEST(ConfigTest, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}

}  // namespace
}  // namespace tflow
