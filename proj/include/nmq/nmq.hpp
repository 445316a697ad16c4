// nmq.hpp
// Umbrella header.

#pragma once

#include "nmq/channels.hpp"
#include "nmq/error.hpp"
#include "nmq/io.hpp"
#include "nmq/nonmarkovianity.hpp"
#include "nmq/parallel.hpp"
#include "nmq/quantum_core.hpp"
#include "nmq/training.hpp"
#include "nmq/vqc.hpp"
