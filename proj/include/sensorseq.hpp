#pragma once

#include "sensorseq/compressor.hpp"
#include "sensorseq/encoder.hpp"
#include "sensorseq/error.hpp"
#include "sensorseq/eval.hpp"
#include "sensorseq/event_model.hpp"
#include "sensorseq/ground_truth.hpp"
#include "sensorseq/matrix_io.hpp"
#include "sensorseq/parallel.hpp"
#include "sensorseq/pipeline.hpp"
#include "sensorseq/random.hpp"
#include "sensorseq/rnn.hpp"
#include "sensorseq/sequencer.hpp"
#include "sensorseq/synth.hpp"
#include "sensorseq/trainer.hpp"
#include "sensorseq/weighting.hpp"
