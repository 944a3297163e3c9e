#pragma once

#include "qnoise/analysis.hpp"
#include "qnoise/circuit.hpp"
#include "qnoise/classifier.hpp"
#include "qnoise/dataset_io.hpp"
#include "qnoise/errors.hpp"
#include "qnoise/noise.hpp"
#include "qnoise/parallel.hpp"
#include "qnoise/random.hpp"
#include "qnoise/rng.hpp"
#include "qnoise/stats.hpp"
#include "qnoise/statevec.hpp"
#include "qnoise/training.hpp"
#include "qnoise/version.hpp"
