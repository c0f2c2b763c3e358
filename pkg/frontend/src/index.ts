export * from "./api";
export * from "./map";
export * from "./overlay";
export * from "./render";
export * from "./types";
export * from "./viewers";
export * from "./workbench";
export * from "./zip";
export { mountWorkbench } from "./main";
