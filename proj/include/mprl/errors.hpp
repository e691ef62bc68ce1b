#pragma once

#include <stdexcept>
#include <string>

namespace mprl {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyActionSet : public Error {
 public:
  EmptyActionSet() : Error("action set is empty") {}
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class InvalidTrack : public Error {
 public:
  InvalidTrack() : Error("ball track needs three consecutive centroids") {}
};

class NoImpact : public Error {
 public:
  NoImpact() : Error("ball is not moving toward the paddle plane") {}
};

class HorizonExceeded : public Error {
 public:
  explicit HorizonExceeded(int t_max)
      : Error("predicted arrival exceeds horizon of " + std::to_string(t_max) + " steps") {}
};

class CapExceeded : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  Infeasible() : Error("every action sequence violates the state box") {}
};

class StepAfterTerminal : public Error {
 public:
  StepAfterTerminal() : Error("step called on a finished game") {}
};

class BallNotFound : public Error {
 public:
  BallNotFound() : Error("no ball pixels in frame") {}
};

class PaddleNotFound : public Error {
 public:
  PaddleNotFound() : Error("no paddle pixels in frame") {}
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace mprl
