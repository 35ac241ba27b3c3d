#pragma once

#include <doctest.h>

#include "lotsub/error.hpp"

/// Kind of the lotsub::Error thrown by fn; fails the test when nothing is thrown.
template <typename Fn>
lotsub::ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const lotsub::Error& e) {
    return e.kind();
  }
  FAIL("expected a lotsub::Error");
  return lotsub::ErrorKind::IoError;
}
