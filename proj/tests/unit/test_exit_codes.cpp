#include <gtest/gtest.h>

#include <sstream>

#include "exit_codes.hpp"
#include "tvkb/error.hpp"

using namespace tvkb;

namespace {

template <class E>
int code_for(const E& error, std::string* message = nullptr) {
  std::ostringstream err;
  const int code = cli::exit_code_for(std::make_exception_ptr(error), err);
  if (message) *message = err.str();
  return code;
}

}  // namespace

TEST(ExitCodes, EachErrorFamilyMapsToItsCode) {
  std::string msg;
  EXPECT_EQ(code_for(ValidationError("bad key"), &msg), 1);
  EXPECT_NE(msg.find("bad key"), std::string::npos);
  EXPECT_EQ(code_for(AuditError("over budget"), &msg), 2);
  EXPECT_NE(msg.find("audit failure: over budget"), std::string::npos);
  EXPECT_EQ(code_for(NumericError("jitter exhausted"), &msg), 3);
  EXPECT_NE(msg.find("numeric failure"), std::string::npos);
}

TEST(ExitCodes, StandardExceptions) {
  EXPECT_EQ(code_for(std::invalid_argument("stod")), 1);
  EXPECT_EQ(code_for(std::runtime_error("other")), 3);
  EXPECT_EQ(code_for(42), 3);
}
