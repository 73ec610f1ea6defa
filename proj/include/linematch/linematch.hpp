#pragma once

#include "rational.hpp"
#include "coord.hpp"
#include "rng.hpp"
#include "adversary.hpp"
#include "offline.hpp"
#include "algorithms.hpp"
#include "stats.hpp"
#include "parallel.hpp"
#include "lemma_checks.hpp"
#include "oracle.hpp"
#include "serialization.hpp"
#include "experiments.hpp"
