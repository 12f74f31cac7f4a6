// Umbrella header for the pairwise word interaction library.
#pragma once

#include "pwi/classifier.hpp"
#include "pwi/config.hpp"
#include "pwi/dataset.hpp"
#include "pwi/encoders.hpp"
#include "pwi/error.hpp"
#include "pwi/interaction.hpp"
#include "pwi/metrics.hpp"
#include "pwi/model.hpp"
#include "pwi/ops.hpp"
#include "pwi/serialize.hpp"
#include "pwi/tensor.hpp"
#include "pwi/training.hpp"
#include "pwi/vocab.hpp"
