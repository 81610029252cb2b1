/** Session socket wrapper. All inbound traffic is schema-checked before any
 * handler sees it, snapshots pass through a bounded drop-oldest queue so
 * rendering never falls behind the server, and outbound messages only exist
 * as values the encoders in protocol.ts agreed to build. */
import {
  ClientMsg,
  Hello,
  ProtocolError,
  RepairReport,
  ServerMsg,
  Snapshot,
  encode,
  parseServer,
} from "./protocol.js";
import { BoundedQueue } from "./queue.js";

export type ConnState = "connecting" | "open" | "closed";

/** Structural subset of WebSocket, so tests can hand in a fake. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export interface Handlers {
  hello?: (h: Hello) => void;
  mode?: (mode: "running" | "paused" | "rewound") => void;
  demos?: (demos: Array<Record<string, unknown>>) => void;
  saved?: (path: string, count: number) => void;
  report?: (r: RepairReport) => void;
  policy?: (text: string | null) => void;
  serverError?: (code: string, message: string) => void;
  protocolError?: (e: ProtocolError) => void;
  conn?: (state: ConnState) => void;
}

const FRAME_BUFFER = 120;

export class StudioClient {
  readonly frames = new BoundedQueue<Snapshot>(FRAME_BUFFER);
  state: ConnState = "connecting";
  private sock: SocketLike;

  constructor(
    url: string,
    private handlers: Handlers,
    factory: (url: string) => SocketLike = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {
    this.sock = factory(url);
    this.sock.onopen = () => this.setState("open");
    this.sock.onclose = () => this.setState("closed");
    this.sock.onerror = () => this.setState("closed");
    this.sock.onmessage = (ev) => this.onMessage(ev.data);
  }

  private setState(s: ConnState): void {
    this.state = s;
    this.handlers.conn?.(s);
  }

  private onMessage(data: unknown): void {
    let m: ServerMsg;
    try {
      m = parseServer(String(data));
    } catch (e) {
      if (e instanceof ProtocolError) {
        this.handlers.protocolError?.(e);
        return;
      }
      throw e;
    }
    this.dispatch(m);
  }

  private dispatch(m: ServerMsg): void {
    switch (m.type) {
      case "hello":
        this.handlers.hello?.(m);
        break;
      case "snapshot":
        this.frames.push(m);
        break;
      case "mode":
        this.handlers.mode?.(m.mode);
        break;
      case "demos":
        this.handlers.demos?.(m.demos);
        break;
      case "saved":
        this.handlers.saved?.(m.path, m.count);
        break;
      case "report":
        this.handlers.report?.(m.report);
        break;
      case "policy":
        this.handlers.policy?.(m.text);
        break;
      case "error":
        this.handlers.serverError?.(m.code, m.message);
        break;
    }
  }

  send(m: ClientMsg): void {
    if (this.state !== "open") {
      this.handlers.protocolError?.(new ProtocolError(`cannot send while ${this.state}`, m));
      return;
    }
    this.sock.send(encode(m));
  }

  close(): void {
    this.sock.close();
  }
}
