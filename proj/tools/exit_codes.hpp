#pragma once

#include <exception>
#include <ostream>
#include <stdexcept>

#include "tvkb/error.hpp"

namespace tvkb::cli {

enum ExitCode { kOk = 0, kValidation = 1, kAudit = 2, kNumeric = 3 };

/// Reports `error` on `err` and returns the process exit code for it.
/// Unknown exception types count as numeric failures.
inline int exit_code_for(const std::exception_ptr& error, std::ostream& err) {
  try {
    std::rethrow_exception(error);
  } catch (const AuditError& e) {
    err << "audit failure: " << e.what() << '\n';
    return kAudit;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (...) {
    err << "numeric failure: unknown exception\n";
    return kNumeric;
  }
}

}  // namespace tvkb::cli
