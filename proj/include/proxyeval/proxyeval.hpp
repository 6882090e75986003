#pragma once

#include "proxyeval/annotation.hpp"
#include "proxyeval/chord.hpp"
#include "proxyeval/consensus.hpp"
#include "proxyeval/errors.hpp"
#include "proxyeval/estimators.hpp"
#include "proxyeval/manifest.hpp"
#include "proxyeval/parallel.hpp"
#include "proxyeval/report.hpp"
#include "proxyeval/rng.hpp"
#include "proxyeval/scoring.hpp"
#include "proxyeval/simulator.hpp"
#include "proxyeval/version.hpp"
