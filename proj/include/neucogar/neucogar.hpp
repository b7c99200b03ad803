#pragma once

#include "neucogar/circuit.hpp"
#include "neucogar/config.hpp"
#include "neucogar/cube.hpp"
#include "neucogar/harness.hpp"
#include "neucogar/io.hpp"
#include "neucogar/metrics.hpp"
#include "neucogar/network.hpp"
#include "neucogar/neuromodulation.hpp"
#include "neucogar/neuron.hpp"
#include "neucogar/random.hpp"
