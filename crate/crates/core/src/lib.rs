//! Hybrid SSVEP + P300 brain-computer interface, without hardware.
//!
//! Four LEDs flicker at distinct frequencies for SSVEP frequency tagging and
//! each flashes once per 2 s stimulation epoch to elicit a P300. The decoder
//! picks the strongest flicker frequency from a Welch spectrum of the
//! occipital channels and confirms it with the largest P300 peak 290–500 ms
//! after the matching flash marker. Only agreeing evidence produces a robot
//! command.
//!
//! | module        | role                                                    |
//! |---------------|---------------------------------------------------------|
//! | [`types`]     | frames, markers, LED table, decisions                   |
//! | [`filters`]   | Butterworth bandpass/low-pass and mains notch (biquads) |
//! | [`spectral`]  | Welch PSD and SSVEP band features                       |
//! | [`erp`]       | marker-locked epochs and P300 peak detection            |
//! | [`decoder`]   | fusion rule, command sinks and feedback events          |
//! | [`pipeline`]  | streaming decoder over frames and markers               |
//! | [`stimulus`]  | tick-accurate LED scheduling and synthetic EEG          |
//! | [`eval`]      | accuracy reports, ITR and the study fixture             |
//! | [`io`]        | CSV formats and run manifests                           |
//! | [`cli`]       | the `hbci` command line                                 |
//!
//! ```
//! use hybrid_bci::prelude::*;
//!
//! let config = StimulusConfig::default();
//! let synth = SynthConfig { attended: vec![2, 0, 3], seed: 7, ..Default::default() };
//! let session = simulate_session(&config, &synth).unwrap();
//! let decisions =
//!     decode_recording(session.frames, &session.markers, &config, &DecoderOptions::default()).unwrap();
//! let commands: Vec<_> = decisions.iter().map(|d| d.decision.command).collect();
//! assert_eq!(commands, vec![Some(Command::Backward), Some(Command::Forward), Some(Command::Left)]);
//! ```

pub mod cli;
pub mod decoder;
pub mod erp;
pub mod eval;
pub mod filters;
pub mod io;
pub mod pipeline;
pub mod spectral;
pub mod stimulus;
pub mod types;

pub mod prelude {
    pub use crate::decoder::{decide, map_to_command, CommandSink, Dispatcher, FeedbackEvent, MockRobot};
    pub use crate::erp::{baseline_correct, detect_p300, extract_epoch, select_p300_winner, Threshold};
    pub use crate::eval::{aggregate, itr_bits_per_selection, itr_bpm, score};
    pub use crate::filters::{design_bandpass, design_lowpass, design_notch, FilterDesign, FilterState};
    pub use crate::pipeline::{decode_recording, DecoderOptions, EpochDecision, StreamingDecoder};
    pub use crate::spectral::{extract_ssvep_features, ssvep_argmax, welch_psd, Window};
    pub use crate::stimulus::{schedule_flashes, schedule_ssvep, simulate_session, verify_frequency, SynthConfig};
    pub use crate::types::{Command, Decision, MarkerCode, MarkerEvent, SampleFrame, StimulusConfig};
}
