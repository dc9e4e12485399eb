#pragma once

#include <gtest/gtest.h>

#include <string>

#include "pushsum/error.hpp"

#define EXPECT_ERRC(statement, expected)                                              \
  do {                                                                                \
    bool thrown_ = false;                                                             \
    try {                                                                             \
      statement;                                                                      \
    } catch (const pushsum::Error& e_) {                                              \
      thrown_ = true;                                                                 \
      EXPECT_EQ(e_.code(), expected)                                                  \
          << "got " << pushsum::to_string(e_.code()) << ": " << e_.what();            \
    }                                                                                 \
    EXPECT_TRUE(thrown_) << "expected " << pushsum::to_string(expected) << " from "    \
                         << #statement;                                               \
  } while (0)
