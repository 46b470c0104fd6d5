#pragma once

#include <stdexcept>
#include <string>

namespace zrp {

// Base of every validation / precondition failure thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class RateOutOfRange : public Error {
public:
    explicit RateOutOfRange(const std::string& m) : Error("RateOutOfRange: " + m) {}
};

class SpecMismatch : public Error {
public:
    explicit SpecMismatch(const std::string& m) : Error("SpecMismatch: " + m) {}
};

class FugacityTooHigh : public Error {
public:
    explicit FugacityTooHigh(const std::string& m) : Error("FugacityTooHigh: " + m) {}
};

class DensityAboveCritical : public Error {
public:
    explicit DensityAboveCritical(const std::string& m) : Error("DensityAboveCritical: " + m) {}
};

class WindowMismatch : public Error {
public:
    explicit WindowMismatch(const std::string& m) : Error("WindowMismatch: " + m) {}
};

class InvalidSnapshotTimes : public Error {
public:
    explicit InvalidSnapshotTimes(const std::string& m) : Error("InvalidSnapshotTimes: " + m) {}
};

class InvalidBoundary : public Error {
public:
    explicit InvalidBoundary(const std::string& m) : Error("InvalidBoundary: " + m) {}
};

class InvalidRateFunction : public Error {
public:
    explicit InvalidRateFunction(const std::string& m) : Error("InvalidRateFunction: " + m) {}
};

class UnknownBond : public Error {
public:
    explicit UnknownBond(const std::string& m) : Error("UnknownBond: " + m) {}
};

class NoAbsorbingBoundary : public Error {
public:
    explicit NoAbsorbingBoundary(const std::string& m) : Error("NoAbsorbingBoundary: " + m) {}
};

class SiteOutOfWindow : public Error {
public:
    explicit SiteOutOfWindow(const std::string& m) : Error("SiteOutOfWindow: " + m) {}
};

class WindowTooSmall : public Error {
public:
    explicit WindowTooSmall(const std::string& m) : Error("WindowTooSmall: " + m) {}
};

class TooFewSamples : public Error {
public:
    explicit TooFewSamples(const std::string& m) : Error("TooFewSamples: " + m) {}
};

class ExcessiveExits : public Error {
public:
    explicit ExcessiveExits(const std::string& m) : Error("ExcessiveExits: " + m) {}
};

class SubcriticalStart : public Error {
public:
    explicit SubcriticalStart(const std::string& m) : Error("SubcriticalStart: " + m) {}
};

class InfiniteCritical : public Error {
public:
    explicit InfiniteCritical(const std::string& m) : Error("InfiniteCritical: " + m) {}
};

// Configuration-file / CLI schema problems; `where` is a JSON pointer path.
class ConfigError : public Error {
public:
    ConfigError(const std::string& where, const std::string& m)
        : Error("ConfigError at " + where + ": " + m) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& m) : Error("IoError: " + m) {}
};

}  // namespace zrp
