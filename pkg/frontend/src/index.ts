export {
  BadMagic,
  Clip,
  DimZero,
  DTYPE_F32,
  DTYPE_U8,
  HEADER_SIZE,
  MAGIC,
  makeClip,
  readVct,
  rintHalfEven,
  ShapeMismatch,
  TruncatedPayload,
  UnsupportedDtype,
  ValueOutOfRange,
  VctError,
  VERSION,
  VersionUnsupported,
  writeVct,
} from "./vct.js";
export {
  dumpLabelsJsonl,
  LabelParseError,
  LabelRecord,
  parseLabelsJsonl,
} from "./labels.js";
export { CliError, cliCommand, runCli, withTempDir } from "./bridge.js";
export {
  BatchOptions,
  BatchResult,
  bound_temporal_featmix,
  bound_videomix_batch,
  FeatmixResult,
  FeatureSeq,
  LabeledClip,
  RngAddress,
} from "./bindings.js";
