"""Clip-level sequence regression with envelope-infused feed-forward
networks and recurrent baselines, plus a reproducible experiment harness."""

from .dataset import Clip, Dataset, Segment, generate_synthetic, load_jsonl, save_jsonl, split
from .errors import DatasetFormatError, TrainingDivergedError
from .ffnn import (FfnnModel, TrainConfig, ffnn_backward, ffnn_dataset_loss,
                   ffnn_forward, ffnn_init, ffnn_loss, ffnn_train)
from .gradcheck import GradReport, check, compare_grads, fd_gradient, unrolled_rnn_loss
from .knowledge import (Envelope, envelope_eval, envelope_values, infuse_labels,
                        load_envelope_file, reconstruct_clip)
from .linalg import Rng, matvec, sigmoid
from .lstm import (LstmCell, LstmModel, LstmTrace, blstm_forward, blstm_train,
                   lstm_backward, lstm_forward, lstm_init, lstm_train)
from .metrics import (CSV_HEADER, EvalReport, evaluate_clip_level, mse, pcc,
                      predict_clip, predict_clips)
from .modelio import load_model, save_model
from .rnn import (RnnModel, RnnTrace, rnn_bptt, rnn_dataset_loss, rnn_forward,
                  rnn_init, rnn_train)
from .experiment import SYSTEMS, ExperimentConfig, run_sweep, train_system

__version__ = "0.1.0"
