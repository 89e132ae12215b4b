#pragma once

// Kernel change-point detection: penalized kernel least-squares segmentation,
// segmentation loss metrics, a numerical verifier for the deterministic
// inequalities behind the method, and a seeded experiment harness.

#include "kcp/errors.hpp"
#include "kcp/gram.hpp"
#include "kcp/io.hpp"
#include "kcp/kernel.hpp"
#include "kcp/metrics.hpp"
#include "kcp/oracle.hpp"
#include "kcp/rng.hpp"
#include "kcp/segmentation.hpp"
#include "kcp/segmenter.hpp"
#include "kcp/series.hpp"
#include "kcp/simulate.hpp"
#include "kcp/threading.hpp"
#include "kcp/verify.hpp"
