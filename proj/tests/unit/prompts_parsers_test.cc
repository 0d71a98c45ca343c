// Copyright 2026 The TermForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "parser_cases.h"
#include "termforge/errors.h"
#include "termforge/parsers.h"
#include "termforge/prompts.h"

namespace termforge {
namespace {

using testing::kSentenceBlock;
using testing::Malformed;
using testing::malformed_cases;

std::size_t occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = hay.find(needle); p != std::string::npos;
       p = hay.find(needle, p + 1)) {
    ++n;
  }
  return n;
}

SentenceRecord anchor_record() {
  SentenceRecord r;
  r.id = "s1";
  r.text = "The board secretary keeps the minutes.";
  r.entities.push_back({"board secretary", 4, 19, "T7"});
  return r;
}

TEST(Prompts, TokenPromptFillsSlotsAndDemandsTags) {
  const SentenceRecord r = anchor_record();
  const std::string p = render_token_prompt(r, r.entities[0]);
  EXPECT_NE(p.find(r.text), std::string::npos);
  EXPECT_GE(occurrences(p, "board secretary"), 2u);
  for (const char* tag : {"<Question>:", "<Correct Answer>:", "<Rephrased Sentence>:"}) {
    EXPECT_NE(p.find(tag), std::string::npos) << tag;
  }
  EXPECT_EQ(p.find('{'), std::string::npos);
  EXPECT_EQ(p, render_token_prompt(r, r.entities[0]));
}

TEST(Prompts, TermMustBelongToAnchor) {
  const SentenceRecord r = anchor_record();
  EXPECT_THROW(render_token_prompt(r, {"director", 0, 8, "T8"}), ValidationError);
}

TEST(Prompts, SentencePromptFillsSlotsAndDemandsTags) {
  SentenceRecord neg = anchor_record();
  neg.text = "The director signs the minutes.";
  const std::string p = render_sentence_prompt(anchor_record(), neg);
  EXPECT_NE(p.find(anchor_record().text), std::string::npos);
  EXPECT_NE(p.find(neg.text), std::string::npos);
  for (const char* tag : {"<Question>:", "<Choice A>:", "<Choice B>:", "<Choice C>:",
                          "<Choice D>:", "<Correct Answer>:"}) {
    EXPECT_NE(p.find(tag), std::string::npos) << tag;
  }
}

TEST(Prompts, RenderTemplate) {
  EXPECT_EQ(render_template("a {x} b {y_z} {x}", {{"x", "1"}, {"y_z", "2"}}), "a 1 b 2 1");
  EXPECT_EQ(render_template("json {\"k\": 1} {}", {}), "json {\"k\": 1} {}");
  EXPECT_THROW(render_template("{missing}", {}), ValidationError);
}

TEST(Prompts, BundledTemplatesMatchDefaults) {
  const PromptTemplates files = PromptTemplates::load(TERMFORGE_TEST_DATA_DIR "/prompts");
  const PromptTemplates builtin = PromptTemplates::defaults();
  EXPECT_EQ(files.token_level, builtin.token_level);
  EXPECT_EQ(files.sentence_level, builtin.sentence_level);
  EXPECT_THROW(PromptTemplates::load("/nonexistent"), IoError);
}

TEST(TokenParser, WellFormedBlock) {
  const TokenOutput o = parse_token_output(
      "<Question>: Q?\n<Correct Answer>: debtor\n<Rephrased Sentence>: The debtor must be notified.");
  EXPECT_EQ(o.question, "Q?");
  EXPECT_EQ(o.correct_answer, "debtor");
  EXPECT_EQ(o.rephrased, "The debtor must be notified.");
}

TEST(TokenParser, ToleratesWhitespaceOrderAndContinuationLines) {
  const TokenOutput o = parse_token_output(
      "\n\n  <Correct Answer>:   Board secretary  \r\n"
      "<Question>: Who records the minutes\n  of each board meeting?\n\n"
      "\t<Rephrased Sentence>: The Board secretary records the minutes.\n\n");
  EXPECT_EQ(o.question, "Who records the minutes\n  of each board meeting?");
  EXPECT_EQ(o.correct_answer, "Board secretary");
  EXPECT_EQ(o.rephrased, "The Board secretary records the minutes.");
}

TEST(TokenParser, RenderParseRoundTrip) {
  const TokenOutput want{"What is the term used for such staff?", "Supervisor",
                         "The term used for such staff is Supervisor."};
  const std::string block = "<Question>: " + want.question + "\n<Correct Answer>: " +
                            want.correct_answer + "\n<Rephrased Sentence>: " +
                            want.rephrased + "\n";
  const TokenOutput got = parse_token_output(block);
  EXPECT_EQ(got.question, want.question);
  EXPECT_EQ(got.correct_answer, want.correct_answer);
  EXPECT_EQ(got.rephrased, want.rephrased);
}

TEST(SentenceParser, WellFormedBlock) {
  const SentenceOutput o = parse_sentence_output(kSentenceBlock);
  EXPECT_EQ(o.question, "Who must approve a related-party loan?");
  EXPECT_EQ(o.correct_index, 0u);
  EXPECT_FALSE(o.answer_not_first);
  EXPECT_EQ(o.correct, o.choices[0]);
  const auto negs = o.negatives();
  EXPECT_EQ(negs[0], o.choices[1]);
  EXPECT_EQ(negs[2], o.choices[3]);
}

TEST(SentenceParser, AnswerOutsideChoiceAIsKeptWithWarning) {
  std::string block = kSentenceBlock;
  const std::string a = "The board of directors must approve a related-party loan.";
  const std::string c = "The board secretary must approve a related-party loan.";
  block.replace(block.rfind(a), a.size(), "  The board secretary   must approve a related-party loan. ");
  const SentenceOutput o = parse_sentence_output(block);
  EXPECT_EQ(o.correct_index, 2u);
  EXPECT_TRUE(o.answer_not_first);
  EXPECT_EQ(o.negatives()[0], a);
  EXPECT_EQ(o.choices[2], c);
}

TEST(Parsers, MalformedVariantsRaiseTypedErrors) {
  const auto cases = malformed_cases();
  ASSERT_EQ(cases.size(), 20u);
  for (const Malformed& c : cases) {
    try {
      if (c.sentence) {
        parse_sentence_output(c.raw);
      } else {
        parse_token_output(c.raw);
      }
      ADD_FAILURE() << c.name << ": parsed without error";
    } catch (const ParseError& e) {
      EXPECT_EQ(e.kind(), c.kind) << c.name << ": got " << parse_error_kind_name(e.kind())
                                  << " (" << e.what() << ")";
    }
  }
}

TEST(Parsers, MissingTagErrorNamesTheTag) {
  try {
    parse_token_output("<Question>: Q?\n<Correct Answer>: debtor\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("Rephrased Sentence"), std::string::npos);
  }
}

}  // namespace
}  // namespace termforge
