/* Copyright 2026 The streamsu Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef STREAMSU_ERRORS_H_
#define STREAMSU_ERRORS_H_

#include <stdexcept>
#include <string>

namespace streamsu {

// Base class for every error raised by the library. The CLI maps
// ConfigError subclasses to exit code 2 and everything else to 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidUtterance : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidToken : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class NoReference : public Error {
 public:
  using Error::Error;
};

class InvalidReference : public Error {
 public:
  using Error::Error;
};

}  // namespace streamsu

#endif  // STREAMSU_ERRORS_H_
